"""
Kernel domain service for the first-order stable spline kernel.

This module contains the closed forms of the kernel: factorization,
tridiagonal inverse, log-determinant and the O(n) products and solves
that they enable.
"""

import logging
import math

import numpy as np

from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.value_objects.kernel_factors import TriFactor, TridiagInverse
from infrastructure.exceptions import DimensionMismatchException, OverflowGuardException


_LOG_FLOAT_MAX = math.log(np.finfo(float).max)
_LOG_FLOAT_TINY = math.log(np.finfo(float).tiny)


class KernelDomainService:
    """
    Domain service exposing the closed forms of the stable spline kernel.

    ``lambda`` is carried through every formula by the scaling law
    ``K(lambda, alpha) = lambda * K(1, alpha)``: it multiplies ``W``, divides
    the inverse and adds ``n log lambda`` to the log-determinant.
    """

    def __init__(self):
        self._logger = logging.getLogger(__name__)

    def build_kernel(self, n: int, alpha: float, lam: float = 1.0) -> np.ndarray:
        """
        Build the dense kernel matrix.

        Args:
            n: Matrix order
            alpha: Decay rate in (0, 1)
            lam: Scale, strictly positive

        Returns:
            n x n matrix with entry (i, j) = lam * alpha**max(i, j)

        Raises:
            ValidationException: If a hyperparameter is outside its domain
        """
        return StableSplineKernel(n, alpha, lam).to_dense()

    def log_weights(self, kernel: StableSplineKernel) -> np.ndarray:
        """
        Logarithm of the diagonal of ``W``.

        ``log w_j = log lambda + log(alpha - alpha^2) + (j-1) log alpha`` for
        j < n and ``log w_n = log lambda + n log alpha``.
        """
        n, alpha = kernel.n, kernel.alpha
        log_alpha = math.log(alpha)
        log_w = math.log(kernel.lam) + math.log(alpha) + math.log1p(-alpha) + log_alpha * np.arange(n)
        log_w[-1] = math.log(kernel.lam) + n * log_alpha
        return log_w

    def factorize(self, kernel: StableSplineKernel) -> TriFactor:
        """
        Closed-form factorization ``K = U W U^T``.

        Args:
            kernel: Valid stable spline kernel

        Returns:
            TriFactor holding the diagonal of W

        Raises:
            OverflowGuardException: If an entry of W underflows to zero
        """
        n, alpha, lam = kernel.n, kernel.alpha, kernel.lam
        log_w = self.log_weights(kernel)
        if log_w.min() < _LOG_FLOAT_TINY:
            raise OverflowGuardException("W diagonal (underflow)", float(log_w.min()))

        w = lam * (alpha - alpha * alpha) * np.power(alpha, np.arange(n, dtype=float))
        w[-1] = lam * alpha ** n
        return TriFactor(n, w)

    def inverse_closed_form(self, kernel: StableSplineKernel) -> TridiagInverse:
        """
        Closed-form tridiagonal inverse of the kernel.

        With ``U^{-1}`` bidiagonal (ones on the diagonal, -1 above it),
        ``K^{-1} = U^{-T} W^{-1} U^{-1}`` has diagonal
        ``1/w_j + 1/w_{j-1}`` and off-diagonal ``-1/w_j``.

        Raises:
            OverflowGuardException: If an entry exceeds the floating-point max
        """
        log_inv_w = -self.log_weights(kernel)
        peak = float(log_inv_w.max()) + math.log(2.0)
        if peak >= _LOG_FLOAT_MAX:
            self._logger.warning(f"Inverse of {kernel!r} refused: log magnitude {peak:.1f}")
            raise OverflowGuardException("alpha^-(n-1)/lambda", peak)

        inv_w = 1.0 / self.factorize(kernel).w
        diag = inv_w.copy()
        diag[1:] += inv_w[:-1]
        return TridiagInverse(kernel.n, diag, -inv_w[:-1])

    def log_det(self, kernel: StableSplineKernel) -> float:
        """
        Log-determinant ``n log lambda + (n-1) log(1-alpha) + n(n+1)/2 log alpha``.

        Computed in the log domain only; the determinant itself underflows
        for modest n.
        """
        n = kernel.n
        return (n * math.log(kernel.lam)
                + (n - 1) * math.log1p(-kernel.alpha)
                + 0.5 * n * (n + 1) * math.log(kernel.alpha))

    def solve_inverse(self, kernel: StableSplineKernel, v) -> np.ndarray:
        """
        Compute ``K^{-1} v`` in O(n) through the tridiagonal inverse.

        Raises:
            DimensionMismatchException: If ``len(v) != n``
        """
        v = np.asarray(v, dtype=float)
        if v.ndim == 0 or v.shape[0] != kernel.n:
            raise DimensionMismatchException("v", kernel.n, v.shape)
        return self.inverse_closed_form(kernel).matvec(v)

    def apply_kernel(self, kernel: StableSplineKernel, v) -> np.ndarray:
        """
        Compute ``K v`` in O(n) through ``U W U^T`` without forming K.

        ``U^T v`` is a forward cumulative sum and ``U x`` a backward one.
        """
        v = np.asarray(v, dtype=float)
        if v.ndim == 0 or v.shape[0] != kernel.n:
            raise DimensionMismatchException("v", kernel.n, v.shape)
        w = self.factorize(kernel).w
        scaled = np.cumsum(v, axis=0) * (w if v.ndim == 1 else w[:, None])
        return np.flip(np.cumsum(np.flip(scaled, axis=0), axis=0), axis=0)

    def columns_sum_check(self, kernel: StableSplineKernel, tolerance: float = 1e-9) -> bool:
        """
        Check that the first n-1 columns of ``K^{-1}`` sum to zero.

        Each column sum is compared against ``tolerance`` times the largest
        magnitude in that column. Vacuously true for n = 1.
        """
        if kernel.n == 1:
            return True
        inverse = self.inverse_closed_form(kernel)
        sums = inverse.column_sums()[:-1]
        scale = inverse.column_max_abs()[:-1]
        return bool(np.all(np.abs(sums) <= tolerance * scale))
