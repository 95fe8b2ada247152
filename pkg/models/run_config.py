from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from config.solver_config import SolverConfig, solver_config


Subcommand = Literal["kernel", "complete", "simulate", "identify", "verify"]
LikelihoodMethod = Literal["data", "weight", "auto"]


class TuningSettings(BaseModel):
    """Search settings for marginal-likelihood hyperparameter tuning."""

    grid_size: int = Field(8, ge=2, description="Grid points per hyperparameter")
    max_evals: int = Field(200, ge=0, description="Nelder-Mead evaluation budget")
    alpha_bounds: Tuple[float, float] = Field((0.05, 0.95), description="Uniform alpha grid range")
    lambda_bounds: Optional[Tuple[float, float]] = Field(
        None, description="Log-uniform lambda grid range; None derives it from the data scale")
    sigma2_bounds: Optional[Tuple[float, float]] = Field(
        None, description="Log-uniform noise variance grid range; None derives it from the data scale")
    lambda_decades: float = Field(6.0, gt=0, description="Width of the data-driven lambda range")
    sigma2_decades: float = Field(6.0, gt=0, description="Width of the data-driven sigma2 range")
    fixed_sigma2: Optional[float] = Field(None, gt=0, description="Known noise variance, excluded from the search")
    grid_workers: int = Field(1, ge=1, description="Threads evaluating grid points")
    likelihood_method: LikelihoodMethod = Field("auto", description="Marginal likelihood evaluation form")

    @field_validator("alpha_bounds")
    @classmethod
    def validate_alpha_bounds(cls, v):
        lo, hi = v
        if not 0.0 < lo < hi < 1.0:
            raise ValueError("alpha bounds must satisfy 0 < low < high < 1")
        return v

    @field_validator("lambda_bounds", "sigma2_bounds")
    @classmethod
    def validate_positive_bounds(cls, v):
        if v is not None and not 0.0 < v[0] < v[1]:
            raise ValueError("bounds must satisfy 0 < low < high")
        return v

    @classmethod
    def from_config(cls, config: SolverConfig = solver_config, **overrides) -> "TuningSettings":
        """Defaults from the environment, with explicit overrides applied on top."""
        values = {
            "grid_size": config.GRID_SIZE,
            "max_evals": config.MAX_EVALS,
            "grid_workers": config.GRID_WORKERS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class RunConfig(BaseModel):
    """One CLI invocation: what to run, on which files, with which settings."""

    subcommand: Subcommand
    input_path: Optional[Path] = Field(None, description="Band JSON or dataset CSV")
    output_path: Optional[Path] = Field(None, description="Result file; stdout when omitted")
    truth_path: Optional[Path] = Field(None, description="Impulse-response CSV with column f")
    n: Optional[int] = Field(None, ge=1, description="Kernel order or FIR truncation order")
    seed: int = Field(0, ge=0)
    output_format: Literal["json", "csv"] = "json"
    tuning: TuningSettings = Field(default_factory=TuningSettings)

    @field_validator("input_path", "truth_path")
    @classmethod
    def validate_existing(cls, v):
        if v is not None and not v.is_file():
            raise ValueError(f"file not found: {v}")
        return v

    @field_validator("output_path")
    @classmethod
    def validate_output(cls, v):
        if v is not None:
            v.parent.mkdir(parents=True, exist_ok=True)
        return v

    @model_validator(mode="after")
    def validate_inputs_present(self):
        if self.subcommand in ("complete", "identify") and self.input_path is None:
            raise ValueError(f"'{self.subcommand}' needs an input file")
        return self


class VerificationSettings(BaseModel):
    """Scale of the acceptance suites run by ``verify``."""

    suites: Optional[List[str]] = Field(None, description="Suite names; None runs all, ['none'] runs nothing")
    n_max: int = Field(30, ge=1, le=200, description="Largest kernel order on the kernel grids")
    instances: int = Field(10, ge=1, description="Random band / identification instances per suite")
    e2e_seeds: int = Field(5, ge=1, description="Seeds of the end-to-end identification run")
    seed: int = Field(0, ge=0)
    full: bool = Field(False, description="Raise counts to the acceptance scale")

    @model_validator(mode="after")
    def apply_full_scale(self):
        if self.full:
            self.instances = max(self.instances, 50)
            self.e2e_seeds = max(self.e2e_seeds, 20)
        return self
