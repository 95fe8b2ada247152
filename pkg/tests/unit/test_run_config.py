import pytest
from pydantic import ValidationError

from config.solver_config import SolverConfig
from models.run_config import RunConfig, TuningSettings, VerificationSettings


class TestTuningSettings:

    def test_defaults(self):
        settings = TuningSettings()
        assert settings.alpha_bounds == (0.05, 0.95)
        assert settings.lambda_bounds is None
        assert settings.likelihood_method == "auto"

    @pytest.mark.parametrize("bounds", [(0.0, 0.5), (0.5, 0.5), (0.2, 1.0)])
    def test_rejects_alpha_bounds(self, bounds):
        with pytest.raises(ValidationError):
            TuningSettings(alpha_bounds=bounds)

    def test_rejects_reversed_scale_bounds(self):
        with pytest.raises(ValidationError):
            TuningSettings(lambda_bounds=(2.0, 1.0))
        with pytest.raises(ValidationError):
            TuningSettings(sigma2_bounds=(0.0, 1.0))

    @pytest.mark.parametrize("field, value", [
        ("grid_size", 1), ("max_evals", -1), ("fixed_sigma2", 0.0),
        ("grid_workers", 0), ("likelihood_method", "exact"),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValidationError):
            TuningSettings(**{field: value})

    def test_from_config(self, monkeypatch):
        monkeypatch.setenv("SSK_GRID_SIZE", "5")
        monkeypatch.setenv("SSK_GRID_WORKERS", "3")
        settings = TuningSettings.from_config(SolverConfig(), max_evals=10, fixed_sigma2=None)
        assert (settings.grid_size, settings.max_evals, settings.grid_workers) == (5, 10, 3)
        assert settings.fixed_sigma2 is None


class TestRunConfig:

    def test_complete_needs_input(self):
        with pytest.raises(ValidationError, match="needs an input file"):
            RunConfig(subcommand="complete")

    def test_missing_input_file(self, data_dir):
        with pytest.raises(ValidationError, match="file not found"):
            RunConfig(subcommand="identify", input_path=data_dir / "absent.csv")

    def test_output_parent_is_created(self, data_dir):
        output = data_dir / "nested" / "result.json"
        config = RunConfig(subcommand="kernel", n=3, output_path=output)
        assert output.parent.is_dir()
        assert config.output_format == "json"

    def test_rejects_unknown_subcommand(self):
        with pytest.raises(ValidationError):
            RunConfig(subcommand="fit")


class TestVerificationSettings:

    def test_full_scale_raises_counts(self):
        settings = VerificationSettings(full=True, instances=3)
        assert (settings.instances, settings.e2e_seeds) == (50, 20)

    def test_small_scale(self):
        settings = VerificationSettings(instances=3, e2e_seeds=2)
        assert (settings.instances, settings.e2e_seeds, settings.suites) == (3, 2, None)

    def test_rejects_large_kernel_grid(self):
        with pytest.raises(ValidationError):
            VerificationSettings(n_max=500)
