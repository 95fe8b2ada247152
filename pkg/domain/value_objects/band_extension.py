"""
Results of the maximum-entropy band completion.

This module defines immutable value objects for the central extension of a
partial band matrix and for the banded factorization of its inverse.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from infrastructure.exceptions import CholeskyFailureException, DimensionMismatchException


def _frozen_matrix(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class CentralExtension:
    """
    Maximum-entropy positive definite completion of an m-band matrix.

    Its inverse is banded with bandwidth m.
    """

    n: int
    m: int
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _frozen_matrix(self.matrix)
        if matrix.shape != (self.n, self.n):
            raise DimensionMismatchException("matrix", (self.n, self.n), matrix.shape)
        object.__setattr__(self, "matrix", matrix)

    def log_det(self) -> float:
        """Log-determinant through a Cholesky factorization."""
        try:
            factor, _ = linalg.cho_factor(self.matrix, lower=True)
        except linalg.LinAlgError as e:
            raise CholeskyFailureException("central extension", str(e))
        return float(2.0 * np.sum(np.log(np.diag(factor))))

    def inverse(self) -> np.ndarray:
        factor = linalg.cho_factor(self.matrix, lower=True)
        inverse = linalg.cho_solve(factor, np.eye(self.n))
        return 0.5 * (inverse + inverse.T)

    def off_band_inverse_ratio(self) -> float:
        """``max_{|i-j|>m} |(C^{-1})_ij| / max |C^{-1}|``; zero when fully specified."""
        if self.m >= self.n - 1:
            return 0.0
        inverse = self.inverse()
        idx = np.arange(self.n)
        off_band = np.abs(np.subtract.outer(idx, idx)) > self.m
        return float(np.abs(inverse[off_band]).max() / np.abs(inverse).max())

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "matrix": self.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class BandFactorization:
    """
    Factored form ``C^{-1} = L V L^T`` of a central extension.

    ``L`` is unit lower-triangular with bandwidth m and ``v`` the positive
    diagonal of ``V``.
    """

    n: int
    m: int
    lower: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        lower = _frozen_matrix(self.lower)
        v = _frozen_matrix(self.v)
        if lower.shape != (self.n, self.n):
            raise DimensionMismatchException("lower", (self.n, self.n), lower.shape)
        if v.shape != (self.n,):
            raise DimensionMismatchException("v", self.n, v.shape)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "v", v)

    def precision(self) -> np.ndarray:
        """``L V L^T``, the banded inverse of the central extension."""
        product = (self.lower * self.v) @ self.lower.T
        return 0.5 * (product + product.T)

    def covariance(self) -> np.ndarray:
        """The central extension recovered as ``(L V L^T)^{-1}``."""
        factor = linalg.cho_factor(self.precision(), lower=True)
        covariance = linalg.cho_solve(factor, np.eye(self.n))
        return 0.5 * (covariance + covariance.T)

    def log_det_covariance(self) -> float:
        """``log det C = -sum log v_j`` since L is unit triangular."""
        return float(-np.sum(np.log(self.v)))

    def subdiagonals(self) -> list:
        """The m nonzero sub-diagonals of L, nearest first."""
        return [np.diagonal(self.lower, -k).tolist() for k in range(1, self.m + 1)]

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "L": self.lower.tolist(), "v": self.v.tolist()}
