"""
Empirical-Bayes hyperparameter tuning.

The marginal likelihood is usually nonconvex in (alpha, lambda, sigma2), so
the search is a coarse grid followed by a bounded Nelder-Mead refinement in
``(logit alpha, log lambda, log sigma2)`` coordinates.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import List, Optional, Tuple
import logging
import math

import numpy as np
from scipy import optimize

from domain.entities.sysid_dataset import SysIdDataset
from domain.value_objects.hyperparams import Hyperparams
from infrastructure.exceptions import NumericalException, ValidationException
from models.run_config import TuningSettings
from services.identification_service import IdentificationService, LikelihoodProblem


_POWER_FLOOR = 1e-8


@dataclass(frozen=True)
class SearchBox:
    """Grid ranges; alpha is searched uniformly, lambda and sigma2 log-uniformly."""

    alpha: Tuple[float, float]
    lam: Tuple[float, float]
    sigma2: Tuple[float, float]

    def grid(self, size: int, fixed_sigma2: Optional[float] = None) -> List[Hyperparams]:
        """All grid points in row-major (alpha, lambda, sigma2) order."""
        alphas = np.linspace(*self.alpha, size)
        lams = np.geomspace(*self.lam, size)
        sigma2s = [fixed_sigma2] if fixed_sigma2 is not None else np.geomspace(*self.sigma2, size)
        return [Hyperparams(a, l, s) for a, l, s in product(alphas, lams, sigma2s)]

    def unconstrained_bounds(self, fixed_sigma2: Optional[float] = None) -> List[Tuple[float, float]]:
        logit = [math.log(a) - math.log1p(-a) for a in self.alpha]
        bounds = [(logit[0], logit[1]), (math.log(self.lam[0]), math.log(self.lam[1]))]
        if fixed_sigma2 is None:
            bounds.append((math.log(self.sigma2[0]), math.log(self.sigma2[1])))
        return bounds


@dataclass(frozen=True)
class TuningResult:
    hyperparams: Hyperparams
    objective: float
    grid_best: Hyperparams
    grid_objective: float
    evaluations: int
    box: SearchBox

    def to_dict(self) -> dict:
        return {
            **self.hyperparams.to_dict(),
            "objective": self.objective,
            "grid_objective": self.grid_objective,
            "evaluations": self.evaluations,
        }


class TuningService:
    """
    Minimizes the marginal-likelihood objective over the hyperparameters.
    """

    def __init__(self, identification_service: IdentificationService):
        self.identification_service = identification_service
        self._logger = logging.getLogger(__name__)

    def tune_hyperparameters(self, data: SysIdDataset, n: int,
                             settings: Optional[TuningSettings] = None) -> Hyperparams:
        """
        Best hyperparameters found by grid search plus local refinement.

        Args:
            data: Dataset with N >= 2
            n: FIR truncation order
            settings: Search settings, defaults from the environment

        Returns:
            Hyperparameters whose objective is no larger than at any grid point

        Raises:
            ValidationException: If the dataset is too short or carries no excitation
        """
        return self.tune(data, n, settings).hyperparams

    def tune(self, data: SysIdDataset, n: int, settings: Optional[TuningSettings] = None) -> TuningResult:
        """Like ``tune_hyperparameters`` but also reports the search trace."""
        settings = settings or TuningSettings.from_config()
        if data.N < 2:
            raise ValidationException("N", "tuning needs at least two output samples", data.N)
        if data.is_degenerate() and np.any(data.y):
            raise ValidationException("u", "input carries no excitation but the output is nonzero")

        problem = self.identification_service.prepare(data, n)
        box = self.search_box(data, settings)
        method = settings.likelihood_method

        grid = box.grid(settings.grid_size, settings.fixed_sigma2)
        values = self._evaluate_grid(grid, problem, method, settings.grid_workers)
        best_index = int(np.argmin(values))
        grid_best, grid_objective = grid[best_index], float(values[best_index])
        if not math.isfinite(grid_objective):
            raise NumericalException("objective is not finite at any grid point", "TUNING_FAILED")
        self._logger.info(
            f"Grid search over {len(grid)} points done: best objective {grid_objective:.6g} at {grid_best}"
        )

        best, best_objective, evaluations = grid_best, grid_objective, len(grid)
        if settings.max_evals > 0:
            refined, refined_objective, refine_evals = self._refine(grid_best, problem, box, settings)
            evaluations += refine_evals
            if refined_objective <= grid_objective:
                best, best_objective = refined, refined_objective
            self._logger.info(
                f"Refinement done after {refine_evals} evaluations: objective {best_objective:.6g}"
            )

        return TuningResult(best, best_objective, grid_best, grid_objective, evaluations, box)

    @staticmethod
    def search_box(data: SysIdDataset, settings: TuningSettings) -> SearchBox:
        """
        Grid ranges, scaled by the output and input power when not given.

        The sigma2 range ends one decade above the output power; the lambda
        range ends two decades above the output-to-input power ratio.
        """
        y_power = max(float(np.mean(np.square(data.y))), _POWER_FLOOR)
        u_power = max(float(np.mean(np.square(data.u[:data.N]))), _POWER_FLOOR)

        sigma2 = settings.sigma2_bounds or (
            y_power * 10.0 ** (1.0 - settings.sigma2_decades), y_power * 10.0
        )
        lam_scale = y_power / u_power
        lam = settings.lambda_bounds or (
            lam_scale * 10.0 ** (2.0 - settings.lambda_decades), lam_scale * 100.0
        )
        return SearchBox(tuple(settings.alpha_bounds), tuple(lam), tuple(sigma2))

    def _safe_objective(self, h: Hyperparams, problem: LikelihoodProblem, method: str) -> float:
        try:
            value = self.identification_service.objective(h, problem, method)
        except NumericalException as e:
            self._logger.debug(f"Objective failed at {h}: {e}")
            return np.inf
        return value if math.isfinite(value) else np.inf

    def _evaluate_grid(self, grid: List[Hyperparams], problem: LikelihoodProblem,
                       method: str, workers: int) -> np.ndarray:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(lambda h: self._safe_objective(h, problem, method), grid))
        else:
            values = [self._safe_objective(h, problem, method) for h in grid]
        return np.asarray(values)

    def _refine(self, start: Hyperparams, problem: LikelihoodProblem, box: SearchBox,
                settings: TuningSettings) -> Tuple[Hyperparams, float, int]:
        fixed = settings.fixed_sigma2
        bounds = box.unconstrained_bounds(fixed)

        def to_hyperparams(theta: np.ndarray) -> Hyperparams:
            full = theta if fixed is None else np.append(theta, math.log(fixed))
            return Hyperparams.from_unconstrained(full)

        def objective(theta: np.ndarray) -> float:
            return self._safe_objective(to_hyperparams(theta), problem, settings.likelihood_method)

        x0 = start.to_unconstrained()[:len(bounds)]
        # Initial simplex steps of half a grid spacing, pointing into the box
        steps = np.array([(hi - lo) / (2.0 * (settings.grid_size - 1)) for lo, hi in bounds])
        upper = np.array([hi for _, hi in bounds])
        directions = np.where(x0 + steps <= upper, 1.0, -1.0)
        simplex = np.vstack([x0, x0 + np.diag(steps * directions)])

        result = optimize.minimize(
            objective, x0, method="Nelder-Mead", bounds=bounds,
            options={"maxfev": settings.max_evals, "initial_simplex": simplex,
                     "xatol": 1e-6, "fatol": 1e-10},
        )
        return to_hyperparams(result.x), float(result.fun), int(result.nfev)
