"""
Hyperparameters of the Gaussian-process impulse-response prior, and the
estimate produced with them.
"""

from dataclasses import dataclass
import math

import numpy as np

from domain.entities.stable_spline_kernel import StableSplineKernel
from infrastructure.exceptions import ValidationException


_LOG_LIMIT = 700.0


def _clamp(value: float) -> float:
    return min(max(value, -_LOG_LIMIT), _LOG_LIMIT)


@dataclass(frozen=True)
class Hyperparams:
    """
    Kernel hyperparameters ``eta = [lambda, alpha]`` plus the noise variance.

    Optimizers work in unconstrained coordinates
    ``(logit alpha, log lambda, log sigma2)``.
    """

    alpha: float
    lam: float
    sigma2: float

    def __post_init__(self):
        if not math.isfinite(self.alpha) or not 0.0 < self.alpha < 1.0:
            raise ValidationException("alpha", "alpha must lie in the open interval (0, 1)", self.alpha)
        if not math.isfinite(self.lam) or self.lam <= 0.0:
            raise ValidationException("lambda", "lambda must be strictly positive", self.lam)
        if not math.isfinite(self.sigma2) or self.sigma2 <= 0.0:
            raise ValidationException("sigma2", "noise variance must be strictly positive", self.sigma2)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "sigma2", float(self.sigma2))

    def kernel(self, n: int) -> StableSplineKernel:
        return StableSplineKernel(n, self.alpha, self.lam)

    def to_unconstrained(self) -> np.ndarray:
        return np.array([
            math.log(self.alpha) - math.log1p(-self.alpha),
            math.log(self.lam),
            math.log(self.sigma2),
        ])

    @classmethod
    def from_unconstrained(cls, theta) -> "Hyperparams":
        logit_alpha, log_lam, log_sigma2 = (float(t) for t in theta)
        # Clamp so extreme simplex vertices stay representable
        alpha = 1.0 / (1.0 + math.exp(-_clamp(logit_alpha)))
        alpha = min(max(alpha, 1e-12), 1.0 - 1e-12)
        return cls(alpha, math.exp(_clamp(log_lam)), math.exp(_clamp(log_sigma2)))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "lambda": self.lam, "sigma2": self.sigma2}


@dataclass(frozen=True, eq=False)
class ImpulseEstimate:
    """
    Minimum-variance impulse-response estimate at lags 1..n.
    """

    f_hat: np.ndarray
    hyperparams_used: Hyperparams
    objective_value: float

    def __post_init__(self):
        f_hat = np.array(self.f_hat, dtype=float).ravel()
        f_hat.setflags(write=False)
        object.__setattr__(self, "f_hat", f_hat)

    @property
    def n(self) -> int:
        return int(self.f_hat.shape[0])

    def to_dict(self) -> dict:
        return {
            **self.hyperparams_used.to_dict(),
            "objective": self.objective_value,
            "f_hat": self.f_hat.tolist(),
        }
