"""
Maximum-entropy domain service for partially specified band matrices.

This module contains the feasibility test, the one-step and recursive
central extensions, the factored form of the extension's inverse and the
entropy and likelihood functionals the extension optimizes.
"""

from typing import Optional
import logging
import math

import numpy as np
from scipy import linalg

from config.solver_config import solver_config
from domain.entities.partial_band_matrix import PartialBandMatrix
from domain.value_objects.band_extension import BandFactorization, CentralExtension
from infrastructure.exceptions import (
    CholeskyFailureException,
    DimensionMismatchException,
    InfeasibleExtensionException,
    ValidationException,
)


def is_positive_definite(matrix: np.ndarray, tolerance: Optional[float] = None) -> bool:
    """
    Cholesky test with pivots larger than ``tolerance * max diagonal``.

    Args:
        matrix: Symmetric matrix
        tolerance: Relative pivot floor, defaults to ``SSK_PD_TOLERANCE``
    """
    tolerance = solver_config.PD_TOLERANCE if tolerance is None else tolerance
    matrix = np.asarray(matrix, dtype=float)
    scale = float(np.max(np.diag(matrix)))
    if scale <= 0.0:
        return False
    try:
        factor = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(np.diag(factor) ** 2 > tolerance * scale))


def pd_log_det(matrix: np.ndarray, name: str = "matrix") -> float:
    """Log-determinant of a positive definite matrix through Cholesky."""
    try:
        factor, _ = linalg.cho_factor(matrix, lower=True)
    except linalg.LinAlgError as e:
        raise CholeskyFailureException(name, str(e))
    return float(2.0 * np.sum(np.log(np.diag(factor))))


class MaxEntropyDomainService:
    """
    Domain service for the central (maximum-entropy) band extension.

    All operations are pure: inputs are immutable and every call works on
    its own copies.
    """

    def __init__(self):
        self._logger = logging.getLogger(__name__)

    def first_infeasible_block(self, partial: PartialBandMatrix) -> Optional[int]:
        """
        Index of the first band block that is not positive definite.

        Returns:
            1-based block index, or None when every block is positive definite
        """
        for start, block in partial.band_blocks():
            if not is_positive_definite(block):
                return start + 1
        return None

    def feasible(self, partial: PartialBandMatrix) -> bool:
        """
        True iff all ``n - m`` contiguous ``(m+1) x (m+1)`` band blocks are
        positive definite, i.e. a positive definite extension exists.
        """
        return self.first_infeasible_block(partial) is None

    def require_feasible(self, partial: PartialBandMatrix) -> None:
        """
        Raises:
            InfeasibleExtensionException: Naming the first failing block
        """
        block_index = self.first_infeasible_block(partial)
        if block_index is not None:
            raise InfeasibleExtensionException(block_index, partial.m)

    @staticmethod
    def _one_step_value(block: np.ndarray) -> float:
        """
        Central value of the unknown corner of a one-step pattern.

        ``y = L^{-1} e_1`` with L the leading ``(d-1) x (d-1)`` block, then
        ``x = -(1/y_1) sum_{j=2}^{d-1} sigma_{dj} y_j``.
        """
        size = block.shape[0]
        leading = block[:-1, :-1]
        e1 = np.zeros(size - 1)
        e1[0] = 1.0
        try:
            y = linalg.cho_solve(linalg.cho_factor(leading, lower=True), e1)
        except linalg.LinAlgError as e:
            raise CholeskyFailureException("leading one-step block", str(e))
        return float(-np.dot(block[-1, 1:-1], y[1:]) / y[0])

    def one_step_extension(self, partial: PartialBandMatrix) -> float:
        """
        Central value of the single unknown corner pair (1, n).

        Args:
            partial: n x n matrix with bandwidth ``m = n - 2``

        Returns:
            The completion value whose inverse vanishes at (1, n)

        Raises:
            ValidationException: If the pattern is not a one-step pattern
            InfeasibleExtensionException: If a band block is not positive definite
        """
        if partial.m != partial.n - 2:
            raise ValidationException("m", f"one-step extension needs m = n - 2 = {partial.n - 2}", partial.m)
        self.require_feasible(partial)
        return self._one_step_value(partial.to_dense(fill_value=0.0))

    def central_extension(self, partial: PartialBandMatrix) -> CentralExtension:
        """
        Maximum-entropy completion by recursive one-step extensions.

        Unknown entries are filled diagonal by diagonal (``|i-j| = m+1``,
        then ``m+2``, ...), left to right. When entry (s, t) is filled every
        other entry of ``C({s..t})`` is already known, and the submatrix is
        completed by its own one-step central extension.

        Raises:
            InfeasibleExtensionException: If a band block is not positive definite
        """
        self.require_feasible(partial)
        completed = partial.to_dense(fill_value=0.0)
        if partial.is_fully_specified():
            return CentralExtension(partial.n, partial.m, completed)

        for s, t in partial.free_pairs():
            value = self._one_step_value(completed[s:t + 1, s:t + 1])
            completed[s, t] = completed[t, s] = value

        self._logger.debug(
            f"Central extension of n={partial.n}, m={partial.m}: "
            f"{len(partial.free_pairs())} entries filled"
        )
        return CentralExtension(partial.n, partial.m, completed)

    def factored_extension(self, partial: PartialBandMatrix) -> BandFactorization:
        """
        Factored form ``C^{-1} = L V L^T`` computed from band data only.

        For column j, with ``a = j + 1`` and ``b = min(j + m, n)`` (1-based),
        ``L[a..b, j] = -S[a..b, a..b]^{-1} S[a..b, j]`` and
        ``v_j = (S[j..b, j..b]^{-1})_{11}``. For j = n the trailing block is
        the scalar ``sigma_nn``.

        Raises:
            InfeasibleExtensionException: If a band block is not positive definite
        """
        self.require_feasible(partial)
        n, m = partial.n, partial.m
        band = partial.to_dense(fill_value=0.0)
        lower = np.eye(n)
        v = np.empty(n)

        for j in range(n):
            last = min(j + m, n - 1)
            trailing = band[j:last + 1, j:last + 1]
            factor = linalg.cho_factor(trailing, lower=True)
            e1 = np.zeros(last - j + 1)
            e1[0] = 1.0
            v[j] = linalg.cho_solve(factor, e1)[0]

            if last > j:
                block = band[j + 1:last + 1, j + 1:last + 1]
                lower[j + 1:last + 1, j] = -linalg.cho_solve(
                    linalg.cho_factor(block, lower=True), band[j + 1:last + 1, j]
                )

        return BandFactorization(n, m, lower, v)

    def gaussian_entropy(self, covariance: np.ndarray) -> float:
        """
        Differential entropy of a zero-mean Gaussian,
        ``0.5 log det S + 0.5 n (1 + log 2 pi)``.
        """
        covariance = self._square(covariance, "S")
        n = covariance.shape[0]
        return 0.5 * pd_log_det(covariance, "S") + 0.5 * n * (1.0 + math.log(2.0 * math.pi))

    def maxlik_objective(self, covariance: np.ndarray, sample_covariance: np.ndarray) -> float:
        """
        Gaussian negative log-likelihood ``log det S + trace(Sbar S^{-1})``.

        Args:
            covariance: Symmetric positive definite S
            sample_covariance: Symmetric Sbar of the same size
        """
        covariance = self._square(covariance, "S")
        sample_covariance = self._square(sample_covariance, "Sbar")
        if sample_covariance.shape != covariance.shape:
            raise DimensionMismatchException("Sbar", covariance.shape, sample_covariance.shape)
        try:
            factor = linalg.cho_factor(covariance, lower=True)
        except linalg.LinAlgError as e:
            raise CholeskyFailureException("S", str(e))
        log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
        return float(log_det + np.trace(linalg.cho_solve(factor, sample_covariance)))

    @staticmethod
    def _square(matrix, name: str) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchException(name, "square", matrix.shape)
        return matrix
