"""
Acceptance suites for the kernel closed forms, the maximum-entropy
completion and the identification pipeline.

Each suite runs a family of numerical checks and reports the worst residual
against its tolerance. ``VerificationService.run`` executes the selected
suites in order and collects a pass/fail table.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
import logging
import time

import numpy as np
import pandas as pd

from domain.entities.partial_band_matrix import PartialBandMatrix
from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.entities.sysid_dataset import SysIdDataset
from domain.services.kernel_domain_service import KernelDomainService
from domain.services.maxent_domain_service import MaxEntropyDomainService
from domain.services.maxent_oracle_service import MaxEntropyOracleService
from domain.value_objects.hyperparams import Hyperparams
from infrastructure.exceptions import ApplicationException, DomainException
from models.run_config import TuningSettings, VerificationSettings
from services.identification_service import IdentificationService
from services.simulation_service import SimulationService
from services.tuning_service import TuningService


KERNEL_ALPHAS = (0.2, 0.5, 0.8)
KERNEL_LAMBDAS = (0.5, 1.0, 10.0)
TC_MOMENT_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)
TC_MOMENT_ORDERS = range(3, 21)


def random_feasible_band(rng: np.random.Generator, n_min: int = 3, n_max: int = 10,
                         bandwidths: Tuple[int, ...] = (1, 2)) -> PartialBandMatrix:
    """
    Band restriction of a random well-conditioned covariance.

    ``S = B B^T / n + 0.5 I`` is positive definite, so every band block of its
    restriction is too.
    """
    n = int(rng.integers(n_min, n_max + 1))
    m = int(rng.choice([b for b in bandwidths if b < n - 1] or [0]))
    B = rng.standard_normal((n, n))
    return PartialBandMatrix.from_dense(B @ B.T / n + 0.5 * np.eye(n), m)


@dataclass
class SuiteResult:
    """Outcome of one acceptance suite."""

    name: str
    description: str
    checks: int = 0
    failures: int = 0
    max_residual: float = 0.0
    tolerance: float = 0.0
    seconds: float = 0.0
    details: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checks > 0 and self.failures == 0

    def record(self, residual: float, tolerance: float, label: str) -> None:
        """Count one check; a NaN residual is a failure."""
        self.checks += 1
        self.tolerance = tolerance
        if not residual <= tolerance:
            self.failures += 1
            self.details.append(f"{label}: residual {residual:.3e} > {tolerance:.1e}")
        if np.isnan(residual) or residual > self.max_residual:
            self.max_residual = float(residual)

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "status": "PASS" if self.passed else "FAIL",
            "checks": self.checks,
            "failures": self.failures,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "seconds": round(self.seconds, 3),
        }


@dataclass
class VerificationReport:
    results: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_frame(self) -> pd.DataFrame:
        columns = ["suite", "status", "checks", "failures", "max_residual", "tolerance", "seconds"]
        return pd.DataFrame([r.to_dict() for r in self.results], columns=columns)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "suites": [r.to_dict() for r in self.results],
            "failures": {r.name: r.details for r in self.results if r.details},
        }


class VerificationService:
    """
    Runs the property and oracle suites at a configurable scale.
    """

    def __init__(self, kernel_service: KernelDomainService,
                 maxent_service: MaxEntropyDomainService,
                 oracle_service: MaxEntropyOracleService,
                 identification_service: IdentificationService,
                 tuning_service: TuningService,
                 simulation_service: SimulationService):
        self.kernel_service = kernel_service
        self.maxent_service = maxent_service
        self.oracle_service = oracle_service
        self.identification_service = identification_service
        self.tuning_service = tuning_service
        self.simulation_service = simulation_service
        self._logger = logging.getLogger(__name__)

        self.suites: Dict[str, Tuple[Callable[[SuiteResult, VerificationSettings], None], str]] = {
            "tc_moment_completion": (self._tc_moment_completion,
                                   "central extension of 1-band TC moments equals the kernel"),
            "inverse_identity": (self._inverse_identity, "closed-form inverse times K equals I"),
            "factorization": (self._factorization, "U W U^T reconstructs K; W matches its closed form"),
            "log_det": (self._log_det, "closed-form log-determinant against dense LU and formula"),
            "column_sums": (self._column_sums, "first n-1 columns of K^-1 sum to zero"),
            "banded_inverse": (self._banded_inverse,
                               "inverse of every central extension is banded; L V L^T consistent"),
            "entropy_dominance": (self._entropy_dominance,
                                  "no perturbed positive definite completion has a larger log-det"),
            "recursion_consistency": (self._recursion_consistency,
                                      "principal submatrices of a central extension are central extensions"),
            "oracle_equivalence": (self._oracle_equivalence,
                                   "coordinate-ascent maximizer agrees with the central extension"),
            "maxlik_stationarity": (self._maxlik_stationarity,
                                    "likelihood objective does not decrease under band-preserving perturbations"),
            "dual_forms": (self._dual_forms, "data-space and weight-space estimates and objectives agree"),
            "end_to_end": (self._end_to_end, "median fit of tuned estimates on f_k = 0.8^k is at least 80"),
        }

    def resolve_suites(self, names: Optional[List[str]]) -> List[str]:
        """
        Raises:
            ApplicationException: If a suite name is unknown
        """
        if names is None or names == ["all"]:
            return list(self.suites)
        if names == ["none"]:
            return []
        unknown = [name for name in names if name not in self.suites]
        if unknown:
            raise ApplicationException(
                f"unknown suite(s): {', '.join(unknown)}; available: {', '.join(self.suites)}",
                "UNKNOWN_SUITE",
            )
        return list(names)

    def run(self, settings: Optional[VerificationSettings] = None) -> VerificationReport:
        settings = settings or VerificationSettings()
        report = VerificationReport()
        for name in self.resolve_suites(settings.suites):
            report.results.append(self.run_suite(name, settings))
        return report

    def run_suite(self, name: str, settings: VerificationSettings) -> SuiteResult:
        suite, description = self.suites[name]
        result = SuiteResult(name, description)
        start = time.perf_counter()
        try:
            suite(result, settings)
        except DomainException as e:
            result.checks += 1
            result.failures += 1
            result.details.append(f"aborted: {e}")
        result.seconds = time.perf_counter() - start

        status = "passed" if result.passed else "FAILED"
        self._logger.info(
            f"Suite {name} {status}: {result.checks} checks, max residual {result.max_residual:.3e} "
            f"({result.seconds:.2f}s)"
        )
        for detail in result.details[:5]:
            self._logger.warning(f"  {name}: {detail}")
        return result

    def _kernel_grid(self, settings: VerificationSettings):
        for n in range(1, settings.n_max + 1):
            for alpha in KERNEL_ALPHAS:
                for lam in KERNEL_LAMBDAS:
                    yield StableSplineKernel(n, alpha, lam)

    def _tc_moment_extensions(self):
        for n in TC_MOMENT_ORDERS:
            for alpha in TC_MOMENT_ALPHAS:
                kernel = StableSplineKernel(n, alpha)
                partial = PartialBandMatrix.from_kernel_moments(kernel, 1)
                yield kernel, partial, self.maxent_service.central_extension(partial)

    def _tc_moment_completion(self, result: SuiteResult, settings: VerificationSettings) -> None:
        for kernel, _, extension in self._tc_moment_extensions():
            residual = float(np.abs(extension.matrix - kernel.to_dense()).max())
            result.record(residual, 1e-9, f"n={kernel.n}, alpha={kernel.alpha}")

    def _inverse_identity(self, result: SuiteResult, settings: VerificationSettings) -> None:
        for kernel in self._kernel_grid(settings):
            product = self.kernel_service.inverse_closed_form(kernel).matvec(kernel.to_dense())
            residual = float(np.abs(product - np.eye(kernel.n)).max())
            result.record(residual, 1e-8, repr(kernel))

    def _factorization(self, result: SuiteResult, settings: VerificationSettings) -> None:
        for kernel in self._kernel_grid(settings):
            n, alpha, lam = kernel.n, kernel.alpha, kernel.lam
            factor = self.kernel_service.factorize(kernel)
            dense = kernel.to_dense()
            reconstruction = float(np.abs(factor.reconstruct() - dense).max() / np.abs(dense).max())

            expected_w = np.array([lam * (alpha ** j - alpha ** (j + 1)) for j in range(1, n)] + [lam * alpha ** n])
            weights = float(np.abs(factor.w / expected_w - 1.0).max())
            result.record(max(reconstruction, weights), 1e-12, repr(kernel))

    def _log_det(self, result: SuiteResult, settings: VerificationSettings) -> None:
        for n in range(1, 13):
            for alpha in KERNEL_ALPHAS:
                for lam in KERNEL_LAMBDAS:
                    kernel = StableSplineKernel(n, alpha, lam)
                    sign, dense = np.linalg.slogdet(kernel.to_dense())
                    residual = abs(self.kernel_service.log_det(kernel) - dense) if sign > 0 else np.inf
                    result.record(residual, 1e-8, f"dense {kernel!r}")

        for n in range(1, 201):
            for alpha in KERNEL_ALPHAS:
                for lam in KERNEL_LAMBDAS:
                    kernel = StableSplineKernel(n, alpha, lam)
                    closed = self.kernel_service.log_det(kernel)
                    formula = n * np.log(lam) + (n - 1) * np.log(1.0 - alpha) + n * (n + 1) / 2 * np.log(alpha)
                    from_weights = float(np.sum(self.kernel_service.log_weights(kernel)))
                    scale = max(1.0, abs(formula))
                    residual = max(abs(closed - formula), abs(from_weights - formula)) / scale
                    result.record(residual, 1e-12, f"formula {kernel!r}")

    def _column_sums(self, result: SuiteResult, settings: VerificationSettings) -> None:
        for kernel in self._kernel_grid(settings):
            if kernel.n == 1:
                continue
            inverse = self.kernel_service.inverse_closed_form(kernel)
            sums = inverse.column_sums()[:-1]
            scale = inverse.column_max_abs()[:-1]
            result.record(float((np.abs(sums) / scale).max()), 1e-9, repr(kernel))

    def _banded_inverse(self, result: SuiteResult, settings: VerificationSettings) -> None:
        for kernel, _, extension in self._tc_moment_extensions():
            result.record(extension.off_band_inverse_ratio(), 1e-9, f"TC n={kernel.n}, alpha={kernel.alpha}")

        rng = np.random.default_rng(settings.seed)
        for k in range(settings.instances):
            partial = random_feasible_band(rng)
            extension = self.maxent_service.central_extension(partial)
            result.record(extension.off_band_inverse_ratio(), 1e-9, f"random #{k} n={partial.n} m={partial.m}")

            covariance = self.maxent_service.factored_extension(partial).covariance()
            consistency = float(np.abs(covariance - extension.matrix).max() / np.abs(extension.matrix).max())
            result.record(consistency, 1e-8, f"factored #{k} n={partial.n} m={partial.m}")

    def _oracle_equivalence(self, result: SuiteResult, settings: VerificationSettings) -> None:
        rng = np.random.default_rng(settings.seed + 1)
        for k in range(settings.instances):
            partial = random_feasible_band(rng)
            central = self.maxent_service.central_extension(partial)
            oracle = self.oracle_service.oracle_max_entropy(partial)
            residual = float(np.abs(oracle.matrix - central.matrix).max())
            result.record(residual, 1e-6, f"#{k} n={partial.n} m={partial.m}")

    def _entropy_dominance(self, result: SuiteResult, settings: VerificationSettings) -> None:
        rng = np.random.default_rng(settings.seed + 4)
        for k in range(settings.instances):
            partial = random_feasible_band(rng)
            central = self.maxent_service.central_extension(partial)
            baseline = central.log_det()
            free = ~partial.band_mask()
            scale = 1e-2 * np.abs(central.matrix).max()

            for trial in range(5):
                step = rng.standard_normal(free.shape)
                candidate = central.matrix + scale * 0.5 * (step + step.T) * free
                if np.linalg.eigvalsh(candidate)[0] <= 0.0:
                    continue
                gain = float(np.linalg.slogdet(candidate)[1]) - baseline
                result.record(max(gain, 0.0), 1e-12, f"#{k} trial {trial} n={partial.n} m={partial.m}")

    def _recursion_consistency(self, result: SuiteResult, settings: VerificationSettings) -> None:
        rng = np.random.default_rng(settings.seed + 5)
        for k in range(settings.instances):
            partial = random_feasible_band(rng, n_min=4)
            central = self.maxent_service.central_extension(partial).matrix
            s = int(rng.integers(0, partial.n - 2))
            t = int(rng.integers(s + 2, partial.n))
            block = central[s:t + 1, s:t + 1]

            restricted = partial.restrict(s, t + 1)
            nested = self.maxent_service.central_extension(restricted).matrix
            residual = float(np.abs(nested - block).max() / np.abs(block).max())
            result.record(residual, 1e-9, f"#{k} n={partial.n} m={partial.m} block {s + 1}..{t + 1}")

    def _maxlik_stationarity(self, result: SuiteResult, settings: VerificationSettings) -> None:
        rng = np.random.default_rng(settings.seed + 2)
        for k in range(max(1, settings.instances // 5)):
            partial = random_feasible_band(rng, n_max=8)
            central = self.maxent_service.central_extension(partial)
            sample = central.matrix
            baseline = self.maxent_service.maxlik_objective(central.matrix, sample)
            precision = self.maxent_service.factored_extension(partial).precision()
            band = np.abs(np.subtract.outer(np.arange(partial.n), np.arange(partial.n))) <= partial.m

            for trial in range(20):
                step = rng.standard_normal(precision.shape)
                step = 0.5 * (step + step.T) * band
                perturbed = precision + 1e-3 * np.abs(precision).max() * step
                if np.linalg.eigvalsh(perturbed)[0] <= 0.0:
                    continue
                candidate = np.linalg.inv(perturbed)
                candidate = 0.5 * (candidate + candidate.T)
                margin = self.maxent_service.maxlik_objective(candidate, sample) - baseline
                # A negative margin is the residual
                result.record(max(-margin, 0.0), 1e-10, f"#{k} trial {trial}")

    def _random_identification_problem(self, rng: np.random.Generator) -> Tuple[SysIdDataset, int, Hyperparams]:
        n = int(rng.integers(2, 51))
        N = int(rng.integers(max(n // 2, 2), 201))
        h = Hyperparams(float(rng.uniform(0.3, 0.95)), float(10.0 ** rng.uniform(-1, 1)),
                        float(10.0 ** rng.uniform(-2, 0)))
        u = rng.standard_normal(N)
        f = self.simulation_service.sample_prior_impulse_response(h.kernel(n), int(rng.integers(2 ** 31)))
        data = self.simulation_service.simulate_dataset(f, u, N, h.sigma2, int(rng.integers(2 ** 31)))
        return data, n, h

    def _dual_forms(self, result: SuiteResult, settings: VerificationSettings) -> None:
        rng = np.random.default_rng(settings.seed + 3)
        for k in range(settings.instances):
            data, n, h = self._random_identification_problem(rng)
            label = f"#{k} n={n} N={data.N}"
            result.record(self.identification_service.dual_form_discrepancy(data, n, h), 1e-6, f"estimate {label}")

            problem = self.identification_service.prepare(data, n)
            data_space = self.identification_service.objective(h, problem, "data")
            weight_space = self.identification_service.objective(h, problem, "weight")
            residual = abs(data_space - weight_space) / max(1.0, abs(data_space))
            result.record(residual, 1e-6, f"likelihood {label}")

    def _end_to_end(self, result: SuiteResult, settings: VerificationSettings) -> None:
        n, N, snr = 50, 500, 10.0
        f_true = self.simulation_service.exponential_impulse_response(n, 0.8)
        tuning = TuningSettings.from_config()
        seeds = np.random.SeedSequence(settings.seed).spawn(settings.e2e_seeds)

        fits = []
        for k, sequence in enumerate(seeds):
            input_seed, noise_seed = (int(s) for s in sequence.generate_state(2))
            u = self.simulation_service.white_noise_input(N, input_seed)
            sigma2 = self.simulation_service.noise_variance_for_snr(f_true, u, N, snr)
            data = self.simulation_service.simulate_dataset(f_true, u, N, sigma2, noise_seed)
            h = self.tuning_service.tune_hyperparameters(data, n, tuning)
            estimate = self.identification_service.estimate_impulse_response(data, n, h)
            fits.append(self.identification_service.fit_percentage(estimate.f_hat, f_true))
            self._logger.debug(f"End-to-end seed {k}: fit {fits[-1]:.2f}, alpha {h.alpha:.3f}")

        median = float(np.median(fits))
        # Residual is the shortfall below a fit of 80
        result.record(max(0.0, 80.0 - median), 0.0, f"median fit {median:.2f} over {len(fits)} seeds")
