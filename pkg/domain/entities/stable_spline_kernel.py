"""
First-order stable spline (TC) kernel entity.

The kernel is represented implicitly by its hyperparameters; the dense
matrix ``K_ij = lambda * alpha**max(i, j)`` (1-based indices) is only
materialized on request.
"""

from dataclasses import dataclass
import math

import numpy as np

from infrastructure.exceptions import ValidationException


@dataclass(frozen=True)
class StableSplineKernel:
    """
    First-order stable spline kernel of order ``n``.

    Immutable and safe to share across threads. Construction rejects
    ``alpha`` outside the open interval (0, 1) and non-positive ``lambda``
    because the matrix is then singular or not positive definite.
    """

    n: int
    alpha: float
    lam: float = 1.0

    def __post_init__(self):
        """Validate hyperparameters after initialization."""
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationException("n", "matrix order must be a positive integer", self.n)
        if not math.isfinite(self.alpha) or not 0.0 < self.alpha < 1.0:
            raise ValidationException("alpha", "alpha must lie in the open interval (0, 1)", self.alpha)
        if not math.isfinite(self.lam) or self.lam <= 0.0:
            raise ValidationException("lambda", "lambda must be strictly positive", self.lam)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "lam", float(self.lam))

    def entry(self, i: int, j: int) -> float:
        """
        Kernel entry at 1-based position (i, j).

        Args:
            i: Row index, 1..n
            j: Column index, 1..n

        Returns:
            ``lambda * alpha**max(i, j)``
        """
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise ValidationException("index", f"({i}, {j}) outside 1..{self.n}", (i, j))
        return self.lam * self.alpha ** max(i, j)

    def to_dense(self) -> np.ndarray:
        """Materialize the n x n kernel matrix."""
        powers = np.arange(1, self.n + 1)
        exponent = np.maximum.outer(powers, powers)
        return self.lam * np.power(self.alpha, exponent)

    def __repr__(self) -> str:
        return f"StableSplineKernel(n={self.n}, alpha={self.alpha}, lambda={self.lam})"
