"""
Closed-form factors of the stable spline kernel.

This module defines immutable value objects for the ``U W U^T``
factorization of the kernel and for its tridiagonal inverse.
"""

from dataclasses import dataclass

import numpy as np

from infrastructure.exceptions import DimensionMismatchException, ValidationException


def _frozen_vector(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TriFactor:
    """
    Diagonal ``W`` of the factorization ``K = U W U^T``.

    ``U`` is the unit upper-triangular matrix of all ones on and above the
    diagonal. It is the same for every kernel, so it is never stored.
    """

    n: int
    w: np.ndarray

    def __post_init__(self):
        w = _frozen_vector(self.w)
        if w.ndim != 1 or w.shape[0] != self.n:
            raise DimensionMismatchException("w", self.n, w.shape)
        if not np.all(w > 0):
            raise ValidationException("w", "all diagonal entries of W must be positive", w)
        object.__setattr__(self, "w", w)

    def tail_sums(self) -> np.ndarray:
        """``s_j = sum_{k >= j} w_k`` for j = 1..n."""
        return np.cumsum(self.w[::-1])[::-1]

    def reconstruct(self) -> np.ndarray:
        """Dense ``U W U^T``, entry (i, j) equal to ``sum_{k >= max(i, j)} w_k``."""
        idx = np.arange(self.n)
        return self.tail_sums()[np.maximum.outer(idx, idx)]

    def log_det(self) -> float:
        """``log det K = sum_j log w_j`` since ``det U = 1``."""
        return float(np.sum(np.log(self.w)))

    def to_dict(self) -> dict:
        return {"n": self.n, "w": self.w.tolist()}


@dataclass(frozen=True, eq=False)
class TridiagInverse:
    """
    Symmetric tridiagonal matrix holding ``K^{-1}``.

    ``diag`` has n entries and ``offdiag`` n - 1 entries (first super- and
    sub-diagonal).
    """

    n: int
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = _frozen_vector(self.diag)
        offdiag = _frozen_vector(self.offdiag)
        if diag.shape != (self.n,):
            raise DimensionMismatchException("diag", self.n, diag.shape)
        if offdiag.shape != (self.n - 1,):
            raise DimensionMismatchException("offdiag", self.n - 1, offdiag.shape)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    def to_dense(self) -> np.ndarray:
        dense = np.diag(self.diag)
        if self.n > 1:
            dense += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return dense

    def to_banded(self) -> np.ndarray:
        """Upper banded storage accepted by ``scipy.linalg.solveh_banded``."""
        banded = np.zeros((2, self.n))
        banded[0, 1:] = self.offdiag
        banded[1, :] = self.diag
        return banded

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Tridiagonal product in O(n)."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise DimensionMismatchException("v", self.n, v.shape[0])
        result = self.diag * v if v.ndim == 1 else self.diag[:, None] * v
        if self.n > 1:
            off = self.offdiag if v.ndim == 1 else self.offdiag[:, None]
            result[:-1] += off * v[1:]
            result[1:] += off * v[:-1]
        return result

    def column_max_abs(self) -> np.ndarray:
        """Largest magnitude in each column, read from the three diagonals."""
        peak = np.abs(self.diag)
        if self.n > 1:
            off = np.abs(self.offdiag)
            peak[:-1] = np.maximum(peak[:-1], off)
            peak[1:] = np.maximum(peak[1:], off)
        return peak

    def column_sums(self) -> np.ndarray:
        """Sum of each column of the dense matrix."""
        sums = self.diag.copy()
        if self.n > 1:
            sums[:-1] += self.offdiag
            sums[1:] += self.offdiag
        return sums

    def to_dict(self) -> dict:
        return {"n": self.n, "diag": self.diag.tolist(), "offdiag": self.offdiag.tolist()}
