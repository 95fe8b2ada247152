import os


class SolverConfig:
    """
    Configuration class for numerical tolerances, tuning defaults and logging
    """

    def __init__(self):
        # Auto-load environment variables from .env file (local development)
        try:
            from dotenv import load_dotenv
            load_dotenv()
        except ImportError:
            # dotenv not available, continue with system environment variables
            pass

        self.LOG_LEVEL = os.getenv("SSK_LOG_LEVEL", "INFO").upper()
        self.SEED = int(os.getenv("SSK_SEED", "0"))

        # Hyperparameter tuning
        self.GRID_SIZE = int(os.getenv("SSK_GRID_SIZE", "8"))
        self.MAX_EVALS = int(os.getenv("SSK_MAX_EVALS", "200"))
        self.GRID_WORKERS = int(os.getenv("SSK_GRID_WORKERS", "1"))
        self.DEFAULT_FIR_ORDER = int(os.getenv("SSK_DEFAULT_FIR_ORDER", "100"))

        # Positive definiteness and oracle settings
        self.PD_TOLERANCE = float(os.getenv("SSK_PD_TOLERANCE", "1e-12"))
        self.ORACLE_MAX_SWEEPS = int(os.getenv("SSK_ORACLE_MAX_SWEEPS", "2000"))
        self.ORACLE_TOLERANCE = float(os.getenv("SSK_ORACLE_TOLERANCE", "1e-9"))

        self._validate_config()

    def _validate_config(self):
        """Validate that every setting lies in its usable range"""
        checks = [
            ("SSK_GRID_SIZE", self.GRID_SIZE >= 2),
            ("SSK_MAX_EVALS", self.MAX_EVALS >= 1),
            ("SSK_GRID_WORKERS", self.GRID_WORKERS >= 1),
            ("SSK_DEFAULT_FIR_ORDER", self.DEFAULT_FIR_ORDER >= 1),
            ("SSK_PD_TOLERANCE", 0 < self.PD_TOLERANCE < 1),
            ("SSK_ORACLE_MAX_SWEEPS", self.ORACLE_MAX_SWEEPS >= 1),
            ("SSK_ORACLE_TOLERANCE", self.ORACLE_TOLERANCE > 0),
            ("SSK_LOG_LEVEL", self.LOG_LEVEL in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}),
        ]

        for field_name, is_valid in checks:
            if not is_valid:
                raise ValueError(f"Invalid configuration value: {field_name}")

    def __repr__(self):
        return (f"SolverConfig(grid_size={self.GRID_SIZE}, max_evals={self.MAX_EVALS}, "
                f"pd_tolerance={self.PD_TOLERANCE})")


# Global config instance
solver_config = SolverConfig()
