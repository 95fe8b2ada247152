"""
Brute-force maximum-entropy oracle.

Maximizes ``log det`` over the free entries of a partial band matrix by
coordinate ascent on the whole matrix. Each coordinate update is a
numerical line search: the positive definite interval of the entry is
bracketed by bisection on the smallest eigenvalue, and ``log det`` is
maximized over it by golden-section search. Nothing here uses the
one-step extension formula, so the oracle can verify the closed-form
central extension at desk scale (n <= 12).
"""

from typing import Optional, Tuple
import logging

import numpy as np
from scipy import linalg, optimize

from config.solver_config import solver_config
from domain.entities.partial_band_matrix import PartialBandMatrix
from domain.services.maxent_domain_service import MaxEntropyDomainService
from domain.value_objects.band_extension import CentralExtension
from infrastructure.exceptions import (
    CholeskyFailureException,
    OracleConvergenceException,
    ValidationException,
)


ORACLE_MAX_ORDER = 12

# Fraction of the feasible half-width used to offset the starting completion
START_OFFSET = 0.5

# Relative widening of the Cauchy-Schwarz bound |x| <= sqrt(c_ii c_jj), so
# that the smallest eigenvalue is strictly negative there
BOUND_MARGIN = 1e-9

# Relative accuracy of the interval endpoints and of the final maximizer
INTERVAL_XTOL = 1e-13
PEAK_XTOL = 1e-14


def _with_entry(matrix: np.ndarray, i: int, j: int, x: float) -> np.ndarray:
    trial = matrix.copy()
    trial[i, j] = trial[j, i] = x
    return trial


def _smallest_eigenvalue(matrix: np.ndarray, i: int, j: int, x: float) -> float:
    return float(np.linalg.eigvalsh(_with_entry(matrix, i, j, x))[0])


def _negative_log_det(matrix: np.ndarray, i: int, j: int, x: float) -> float:
    sign, log_det = np.linalg.slogdet(_with_entry(matrix, i, j, x))
    return -float(log_det) if sign > 0 else np.inf


def _log_det_slope(matrix: np.ndarray, i: int, j: int, x: float) -> float:
    """``d log det / dx`` for the symmetric pair, ``2 (C^{-1})_ij``."""
    unit = np.zeros(matrix.shape[0])
    unit[j] = 1.0
    try:
        column = linalg.cho_solve(linalg.cho_factor(_with_entry(matrix, i, j, x), lower=True), unit)
    except linalg.LinAlgError as e:
        raise CholeskyFailureException("oracle trial completion", str(e))
    return 2.0 * float(column[i])


class MaxEntropyOracleService:
    """
    Numeric log-det maximizer used as an independent verification oracle.

    With every other entry fixed, ``log det C`` is concave in one free
    symmetric pair (i, j) and finite exactly on an open interval of values.
    The update finds that interval, then the maximizer inside it.
    """

    def __init__(self, maxent_service: MaxEntropyDomainService):
        self.maxent_service = maxent_service
        self._logger = logging.getLogger(__name__)

    def oracle_max_entropy(self, partial: PartialBandMatrix,
                           max_sweeps: Optional[int] = None,
                           tolerance: Optional[float] = None) -> CentralExtension:
        """
        Maximize log det over all positive definite completions.

        Args:
            partial: Feasible partial band matrix, n <= 12
            max_sweeps: Sweep budget, defaults to ``SSK_ORACLE_MAX_SWEEPS``
            tolerance: Stop when ``max |2 (C^{-1})_ij|`` over free pairs is below
                ``tolerance * max(1, max |C^{-1}|)``

        Raises:
            ValidationException: If n exceeds the oracle's desk scale
            InfeasibleExtensionException: If a band block is not positive definite
            OracleConvergenceException: If the sweep budget is exhausted
        """
        max_sweeps = solver_config.ORACLE_MAX_SWEEPS if max_sweeps is None else max_sweeps
        tolerance = solver_config.ORACLE_TOLERANCE if tolerance is None else tolerance

        if partial.n > ORACLE_MAX_ORDER:
            raise ValidationException("n", f"oracle is limited to n <= {ORACLE_MAX_ORDER}", partial.n)
        self.maxent_service.require_feasible(partial)

        if partial.is_fully_specified():
            return CentralExtension(partial.n, partial.m, partial.to_dense())

        pairs = partial.free_pairs()
        completed = self.initial_completion(partial)

        residual = np.inf
        for sweep in range(1, max_sweeps + 1):
            for i, j in pairs:
                completed[i, j] = completed[j, i] = self.line_search(completed, i, j)

            residual = self._gradient_residual(completed, pairs)
            self._logger.debug(f"Oracle sweep {sweep}: gradient residual {residual:.3e}")
            if residual < tolerance:
                self._logger.info(f"Oracle converged after {sweep} sweeps (n={partial.n}, m={partial.m})")
                return CentralExtension(partial.n, partial.m, completed)

        raise OracleConvergenceException(max_sweeps, residual)

    def initial_completion(self, partial: PartialBandMatrix) -> np.ndarray:
        """
        A positive definite completion that is generally not the central one.

        Free entries are filled diagonal by diagonal, each at the midpoint of
        its feasible interval inside ``C({i..j})`` shifted by
        ``START_OFFSET`` half-widths, which keeps that submatrix positive
        definite.
        """
        completed = partial.to_dense(fill_value=0.0)
        for i, j in partial.free_pairs():
            block = completed[i:j + 1, i:j + 1]
            low, high = self.feasible_interval(block, 0, j - i)
            completed[i, j] = completed[j, i] = 0.5 * (low + high) + START_OFFSET * 0.5 * (high - low)
        return completed

    def feasible_interval(self, matrix: np.ndarray, i: int, j: int,
                          inside: Optional[float] = None) -> Tuple[float, float]:
        """
        Open interval of values of entry (i, j) that keep ``matrix`` positive definite.

        The smallest eigenvalue is concave in the entry, so the interval is
        bracketed by the 2 x 2 principal minor bound and each endpoint is
        located by a bracketing root search (Brent) on the smallest eigenvalue.

        Args:
            matrix: Symmetric matrix whose other entries are fixed
            i, j: Free pair, i != j
            inside: A value known to be feasible; found by maximizing the
                smallest eigenvalue when omitted

        Raises:
            CholeskyFailureException: If no value of the entry is feasible
        """
        bound = float(np.sqrt(matrix[i, i] * matrix[j, j])) * (1.0 + BOUND_MARGIN)
        if inside is None:
            search = optimize.minimize_scalar(
                lambda x: -_smallest_eigenvalue(matrix, i, j, x),
                bounds=(-bound, bound), method="bounded",
            )
            inside = float(search.x)
        if _smallest_eigenvalue(matrix, i, j, inside) <= 0.0:
            raise CholeskyFailureException(f"entry ({i + 1}, {j + 1})", "no positive definite value")

        xtol = INTERVAL_XTOL * bound
        low = optimize.brentq(lambda x: _smallest_eigenvalue(matrix, i, j, x), -bound, inside, xtol=xtol)
        high = optimize.brentq(lambda x: _smallest_eigenvalue(matrix, i, j, x), inside, bound, xtol=xtol)
        return float(low), float(high)

    def line_search(self, matrix: np.ndarray, i: int, j: int) -> float:
        """
        Value of entry (i, j) that maximizes ``log det`` with the rest fixed.

        Golden-section search over the feasible interval locates the peak to
        about the square root of machine precision, where ``log det`` stops
        resolving the difference. The peak is then pinned down by a
        bracketing root search on the slope ``2 (C^{-1})_ij``, which is
        decreasing on the interval.
        """
        low, high = self.feasible_interval(matrix, i, j, inside=float(matrix[i, j]))
        width = high - low
        left, right = low + 0.05 * width, high - 0.05 * width
        # Searched as an offset from the lower endpoint so the relative
        # stopping test does not depend on where zero lies
        golden = optimize.minimize_scalar(
            lambda t: _negative_log_det(matrix, i, j, low + t),
            bracket=(0.05 * width, 0.5 * width, 0.95 * width), method="golden",
        )
        peak = low + float(golden.x)

        def slope(x: float) -> float:
            return _log_det_slope(matrix, i, j, x)

        step = 1e-6 * width
        a, b = max(left, peak - step), min(right, peak + step)
        if slope(a) < 0.0 or slope(b) > 0.0:
            a, b = left, right
        if slope(a) == 0.0:
            return a
        if slope(b) == 0.0:
            return b
        return float(optimize.brentq(slope, a, b, xtol=PEAK_XTOL * max(1.0, width)))

    @staticmethod
    def _gradient_residual(matrix: np.ndarray, pairs) -> float:
        inverse = np.linalg.inv(matrix)
        rows, cols = zip(*pairs)
        gradient = 2.0 * np.abs(inverse[list(rows), list(cols)])
        return float(gradient.max() / max(1.0, np.abs(inverse).max()))
