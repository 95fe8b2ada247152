"""
Gaussian-process impulse-response estimation with the stable spline prior.

The service builds the convolution operator, evaluates the marginal
likelihood of the hyperparameters and computes the minimum-variance
estimate. Both the data-space (N x N) and the weight-space (n x n) forms
are available; the latter uses the closed-form tridiagonal inverse and
log-determinant of the kernel.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy import linalg

from domain.entities.sysid_dataset import SysIdDataset
from domain.services.kernel_domain_service import KernelDomainService
from domain.value_objects.hyperparams import Hyperparams, ImpulseEstimate
from infrastructure.exceptions import (
    CholeskyFailureException,
    DimensionMismatchException,
    OverflowGuardException,
    ValidationException,
)


LIKELIHOOD_METHODS = ("data", "weight", "auto")


@dataclass(frozen=True, eq=False)
class LikelihoodProblem:
    """
    Quantities of a dataset that do not depend on the hyperparameters.

    ``GU`` is the convolution operator times the all-ones upper-triangular
    factor shared by every stable spline kernel, i.e. cumulative sums of
    the columns of G.
    """

    G: np.ndarray
    GU: np.ndarray
    GtG: np.ndarray
    Gty: np.ndarray
    y: np.ndarray
    yty: float

    @property
    def N(self) -> int:
        return int(self.G.shape[0])

    @property
    def n(self) -> int:
        return int(self.G.shape[1])


def _upper_unit_apply(x: np.ndarray) -> np.ndarray:
    """``U x`` for the all-ones upper-triangular U: backward cumulative sum."""
    return np.flip(np.cumsum(np.flip(x, axis=0), axis=0), axis=0)


class IdentificationService:
    """
    Application service for kernel-based impulse-response identification.
    """

    def __init__(self, kernel_service: KernelDomainService):
        self.kernel_service = kernel_service
        self._logger = logging.getLogger(__name__)

    def build_convolution_operator(self, u, N: int, n: int) -> np.ndarray:
        """
        Truncated convolution operator with zero initial conditions.

        Args:
            u: Input samples u_1, u_2, ...
            N: Number of output samples
            n: FIR truncation order

        Returns:
            N x n matrix with ``G[t, k] = u_{t-k}`` (1-based) and ``u_s = 0``
            for s <= 0
        """
        if N < 1:
            raise ValidationException("N", "number of samples must be at least 1", N)
        if n < 1:
            raise ValidationException("n", "FIR order must be at least 1", n)
        u = np.asarray(u, dtype=float).ravel()
        if u.shape[0] < N - 1:
            raise DimensionMismatchException("u", f">= {N - 1}", u.shape[0])

        first_column = np.concatenate(([0.0], u[:N - 1]))
        return linalg.toeplitz(first_column, np.zeros(n))

    def prepare(self, data: SysIdDataset, n: int) -> LikelihoodProblem:
        """Precompute the hyperparameter-free terms of a dataset."""
        G = self.build_convolution_operator(data.u, data.N, n)
        y = np.asarray(data.y, dtype=float)
        return LikelihoodProblem(
            G=G,
            GU=np.cumsum(G, axis=1),
            GtG=G.T @ G,
            Gty=G.T @ y,
            y=y,
            yty=float(y @ y),
        )

    def output_covariance(self, h: Hyperparams, G: np.ndarray) -> np.ndarray:
        """
        ``Sigma_y = G K G^T + sigma2 I`` computed as ``(GU) W (GU)^T + sigma2 I``.
        """
        G = np.asarray(G, dtype=float)
        w = self.kernel_service.factorize(h.kernel(G.shape[1])).w
        GU = np.cumsum(G, axis=1)
        return self._covariance_from_gu(GU, w, h.sigma2)

    @staticmethod
    def _covariance_from_gu(GU: np.ndarray, w: np.ndarray, sigma2: float) -> np.ndarray:
        covariance = (GU * w) @ GU.T
        covariance = 0.5 * (covariance + covariance.T)
        covariance[np.diag_indices_from(covariance)] += sigma2
        return covariance

    def marginal_likelihood(self, h: Hyperparams, data: SysIdDataset, n: int,
                            method: str = "data") -> float:
        """
        Objective ``log det Sigma_y + y^T Sigma_y^{-1} y`` (to be minimized).

        Args:
            h: Hyperparameters
            data: Dataset
            n: FIR truncation order
            method: ``data`` (Cholesky of Sigma_y), ``weight`` (closed-form
                kernel inverse and determinant) or ``auto``

        Raises:
            CholeskyFailureException: If the covariance is numerically singular
        """
        return self.objective(h, self.prepare(data, n), method)

    def objective(self, h: Hyperparams, problem: LikelihoodProblem, method: str = "data") -> float:
        """Marginal-likelihood objective on a prepared problem."""
        if method not in LIKELIHOOD_METHODS:
            raise ValidationException("likelihood_method", f"expected one of {LIKELIHOOD_METHODS}", method)

        if method == "auto":
            method = "weight" if problem.n < problem.N else "data"
            if method == "weight":
                try:
                    return self._weight_space_objective(h, problem)
                except (OverflowGuardException, CholeskyFailureException) as e:
                    self._logger.debug(f"Weight-space objective unavailable at {h}: {e}")
                    method = "data"

        if method == "weight":
            return self._weight_space_objective(h, problem)
        return self._data_space_objective(h, problem)

    def _data_space_objective(self, h: Hyperparams, problem: LikelihoodProblem) -> float:
        w = self.kernel_service.factorize(h.kernel(problem.n)).w
        covariance = self._covariance_from_gu(problem.GU, w, h.sigma2)
        try:
            factor = linalg.cho_factor(covariance, lower=True)
        except linalg.LinAlgError as e:
            raise CholeskyFailureException("Sigma_y", str(e))
        log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
        return float(log_det + problem.y @ linalg.cho_solve(factor, problem.y))

    def _weight_space_factor(self, h: Hyperparams, GtG: np.ndarray):
        kernel = h.kernel(GtG.shape[0])
        precision = self.kernel_service.inverse_closed_form(kernel).to_dense() + GtG / h.sigma2
        try:
            return kernel, linalg.cho_factor(precision, lower=True)
        except linalg.LinAlgError as e:
            raise CholeskyFailureException("K^-1 + G^T G / sigma2", str(e))

    def _weight_space_objective(self, h: Hyperparams, problem: LikelihoodProblem) -> float:
        """
        ``log det Sigma_y = log det K + log det(K^{-1} + G^T G/s2) + N log s2``;
        the quadratic form follows from the Woodbury identity.
        """
        kernel, factor = self._weight_space_factor(h, problem.GtG)
        log_det = (self.kernel_service.log_det(kernel)
                   + 2.0 * np.sum(np.log(np.diag(factor[0])))
                   + problem.N * math.log(h.sigma2))
        projected = problem.Gty @ linalg.cho_solve(factor, problem.Gty)
        quadratic = problem.yty / h.sigma2 - projected / h.sigma2 ** 2
        return float(log_det + quadratic)

    def estimate_impulse_response(self, data: SysIdDataset, n: int, h: Hyperparams) -> ImpulseEstimate:
        """
        Minimum-variance estimate ``K G^T (G K G^T + sigma2 I)^{-1} y``.

        ``K G^T`` is applied as ``U W (GU)^T`` so K is never formed.
        """
        problem = self.prepare(data, n)
        w = self.kernel_service.factorize(h.kernel(n)).w
        covariance = self._covariance_from_gu(problem.GU, w, h.sigma2)
        try:
            factor = linalg.cho_factor(covariance, lower=True)
        except linalg.LinAlgError as e:
            raise CholeskyFailureException("Sigma_y", str(e))

        weights = linalg.cho_solve(factor, problem.y)
        f_hat = _upper_unit_apply(w * (problem.GU.T @ weights))
        log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
        objective = float(log_det + problem.y @ weights)

        self._logger.debug(f"Estimated {n} lags with {h}, objective {objective:.6g}")
        return ImpulseEstimate(f_hat, h, objective)

    def estimate_impulse_response_weight_space(self, data: SysIdDataset, n: int,
                                               h: Hyperparams) -> np.ndarray:
        """
        The same estimate as ``(K^{-1} + G^T G/sigma2)^{-1} G^T y / sigma2``
        using the closed-form tridiagonal ``K^{-1}``.
        """
        problem = self.prepare(data, n)
        _, factor = self._weight_space_factor(h, problem.GtG)
        return linalg.cho_solve(factor, problem.Gty / h.sigma2)

    def dual_form_discrepancy(self, data: SysIdDataset, n: int, h: Hyperparams) -> float:
        """Relative difference ``||f_data - f_weight|| / max(||f_data||, tiny)``."""
        f_data = self.estimate_impulse_response(data, n, h).f_hat
        f_weight = self.estimate_impulse_response_weight_space(data, n, h)
        scale = max(np.linalg.norm(f_data), np.finfo(float).tiny)
        return float(np.linalg.norm(f_data - f_weight) / scale)

    def posterior_covariance(self, data: SysIdDataset, n: int, h: Hyperparams) -> np.ndarray:
        """Posterior covariance of f, ``(K^{-1} + G^T G/sigma2)^{-1}``."""
        problem = self.prepare(data, n)
        _, factor = self._weight_space_factor(h, problem.GtG)
        covariance = linalg.cho_solve(factor, np.eye(n))
        return 0.5 * (covariance + covariance.T)

    @staticmethod
    def fit_percentage(f_hat, f_true) -> float:
        """``100 (1 - ||f_hat - f|| / ||f||)``."""
        f_hat = np.asarray(f_hat, dtype=float)
        f_true = np.asarray(f_true, dtype=float)
        if f_hat.shape != f_true.shape:
            raise DimensionMismatchException("f_true", f_hat.shape, f_true.shape)
        norm = np.linalg.norm(f_true)
        if norm == 0.0:
            raise ValidationException("f_true", "fit is undefined for a zero impulse response")
        return float(100.0 * (1.0 - np.linalg.norm(f_hat - f_true) / norm))
