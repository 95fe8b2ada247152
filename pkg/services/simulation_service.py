"""
Synthetic identification experiments.

Every function takes an explicit seed and draws from its own
``numpy.random.Generator``, so concurrent calls never share state.
"""

from typing import Optional
import logging

import numpy as np

from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.entities.sysid_dataset import SysIdDataset
from domain.services.kernel_domain_service import KernelDomainService
from infrastructure.exceptions import ValidationException
from services.identification_service import IdentificationService


class SimulationService:
    """
    Generates impulse responses, inputs and noisy outputs.
    """

    def __init__(self, identification_service: IdentificationService, kernel_service: KernelDomainService):
        self.identification_service = identification_service
        self.kernel_service = kernel_service
        self._logger = logging.getLogger(__name__)

    def simulate_dataset(self, f_true, u, N: int, sigma2: float, seed: Optional[int] = None) -> SysIdDataset:
        """
        ``y_t = sum_k f_k u_{t-k} + e_t`` with ``e_t ~ N(0, sigma2)`` i.i.d.

        Args:
            f_true: Impulse response at lags 1..n
            u: Input of at least N samples
            N: Number of output samples
            sigma2: Noise variance, 0 for noiseless data
            seed: Noise seed, recorded in the dataset

        Returns:
            Dataset holding the first N input samples and the outputs
        """
        if sigma2 < 0 or not np.isfinite(sigma2):
            raise ValidationException("sigma2", "noise variance must be finite and non-negative", sigma2)
        f_true = np.asarray(f_true, dtype=float).ravel()
        u = np.asarray(u, dtype=float).ravel()

        G = self.identification_service.build_convolution_operator(u, N, f_true.shape[0])
        rng = np.random.default_rng(seed)
        noise = np.sqrt(sigma2) * rng.standard_normal(N)

        self._logger.debug(f"Simulated N={N} samples, n={f_true.shape[0]}, sigma2={sigma2:.6g}, seed={seed}")
        return SysIdDataset(u[:N], G @ f_true + noise, seed=seed)

    @staticmethod
    def white_noise_input(length: int, seed: Optional[int] = None) -> np.ndarray:
        """Unit-variance Gaussian white noise, persistently exciting of any order."""
        if length < 1:
            raise ValidationException("N", "input length must be at least 1", length)
        return np.random.default_rng(seed).standard_normal(length)

    @staticmethod
    def impulse_input(length: int) -> np.ndarray:
        u = np.zeros(length)
        u[0] = 1.0
        return u

    @staticmethod
    def exponential_impulse_response(n: int, decay: float) -> np.ndarray:
        """``f_k = decay^k`` for k = 1..n."""
        if n < 1:
            raise ValidationException("n", "impulse response needs at least one lag", n)
        if not 0.0 < decay < 1.0:
            raise ValidationException("decay", "decay must lie in the open interval (0, 1)", decay)
        return decay ** np.arange(1, n + 1, dtype=float)

    def sample_prior_impulse_response(self, kernel: StableSplineKernel, seed: Optional[int] = None) -> np.ndarray:
        """
        Draw ``f ~ N(0, K)`` through the factor ``K = U W U^T``.
        """
        w = self.kernel_service.factorize(kernel).w
        z = np.random.default_rng(seed).standard_normal(kernel.n)
        return np.flip(np.cumsum(np.flip(np.sqrt(w) * z)))

    def noise_variance_for_snr(self, f_true, u, N: int, snr: float) -> float:
        """
        Noise variance giving ``var(G f) / sigma2 = snr`` on this input.
        """
        if snr <= 0 or not np.isfinite(snr):
            raise ValidationException("snr", "signal-to-noise ratio must be positive", snr)
        f_true = np.asarray(f_true, dtype=float).ravel()
        G = self.identification_service.build_convolution_operator(u, N, f_true.shape[0])
        signal_power = float(np.var(G @ f_true))
        if signal_power == 0.0:
            raise ValidationException("snr", "noise-free output is constant, SNR is undefined", snr)
        return signal_power / snr
