"""
Pytest configuration and shared fixtures for the stable-spline-maxent test suite.

This module provides global test configuration, shared fixtures, and utilities
for all test modules in the project.
"""

import pytest
import os
import sys
from typing import Callable

import numpy as np

# Add project root to Python path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

# Set test environment variables
os.environ.update({
    'SSK_LOG_LEVEL': 'WARNING',
    'SSK_SEED': '0',
})

from domain.entities.partial_band_matrix import PartialBandMatrix  # noqa: E402
from domain.entities.stable_spline_kernel import StableSplineKernel  # noqa: E402
from domain.entities.sysid_dataset import SysIdDataset  # noqa: E402
from domain.services.kernel_domain_service import KernelDomainService  # noqa: E402
from domain.services.maxent_domain_service import MaxEntropyDomainService  # noqa: E402
from domain.services.maxent_oracle_service import MaxEntropyOracleService  # noqa: E402
from domain.value_objects.hyperparams import Hyperparams  # noqa: E402
from services.identification_service import IdentificationService  # noqa: E402
from services.simulation_service import SimulationService  # noqa: E402
from services.tuning_service import TuningService  # noqa: E402
from services.verification_service import random_feasible_band  # noqa: E402


@pytest.fixture
def kernel_service() -> KernelDomainService:
    return KernelDomainService()


@pytest.fixture
def maxent_service() -> MaxEntropyDomainService:
    return MaxEntropyDomainService()


@pytest.fixture
def oracle_service(maxent_service) -> MaxEntropyOracleService:
    return MaxEntropyOracleService(maxent_service)


@pytest.fixture
def identification_service(kernel_service) -> IdentificationService:
    return IdentificationService(kernel_service)


@pytest.fixture
def tuning_service(identification_service) -> TuningService:
    return TuningService(identification_service)


@pytest.fixture
def simulation_service(identification_service, kernel_service) -> SimulationService:
    return SimulationService(identification_service, kernel_service)


@pytest.fixture
def container():
    """Freshly configured dependency injection container."""
    from infrastructure.container import configure_container
    return configure_container()


@pytest.fixture
def tc_band() -> Callable[..., PartialBandMatrix]:
    """Factory for the m-band restriction of a TC kernel (lambda = 1)."""
    def _make(n: int = 3, alpha: float = 0.5, m: int = 1) -> PartialBandMatrix:
        return PartialBandMatrix.from_kernel_moments(StableSplineKernel(n, alpha), m)
    return _make


@pytest.fixture
def toeplitz_band() -> PartialBandMatrix:
    """1-band n=4 with diagonal 2 and off-diagonal 1."""
    return PartialBandMatrix(4, 1, ([2.0, 2.0, 2.0, 2.0], [1.0, 1.0, 1.0]))


@pytest.fixture
def random_band() -> Callable[..., PartialBandMatrix]:
    """Seeded factory of random feasible 1- and 2-band instances."""
    def _make(seed: int = 0, **kwargs) -> PartialBandMatrix:
        return random_feasible_band(np.random.default_rng(seed), **kwargs)
    return _make


@pytest.fixture
def white_noise_problem(simulation_service):
    """Small identification problem drawn from the TC prior: (data, n, h, f_true)."""
    n, N = 10, 60
    h = Hyperparams(0.7, 1.0, 0.01)
    f_true = simulation_service.sample_prior_impulse_response(h.kernel(n), seed=11)
    u = simulation_service.white_noise_input(N, seed=12)
    data = simulation_service.simulate_dataset(f_true, u, N, h.sigma2, seed=13)
    return data, n, h, f_true


@pytest.fixture
def impulse_dataset() -> SysIdDataset:
    """Unit impulse input with y = [0, 1, 0.5, 0.25]."""
    u = np.zeros(4)
    u[0] = 1.0
    return SysIdDataset(u, [0.0, 1.0, 0.5, 0.25])


@pytest.fixture
def data_dir(tmp_path):
    """Temporary directory for input and output files."""
    directory = tmp_path / "data"
    directory.mkdir()
    return directory


def pytest_configure(config):
    """Configure pytest with custom markers and settings."""
    config.addinivalue_line(
        "markers", "unit: mark test as a unit test"
    )
    config.addinivalue_line(
        "markers", "integration: mark test as an integration test"
    )
    config.addinivalue_line(
        "markers", "e2e: mark test as an end-to-end test"
    )
    config.addinivalue_line(
        "markers", "slow: mark test as slow running"
    )


def pytest_collection_modifyitems(config, items):
    """Modify test collection to add automatic markers."""
    for item in items:
        # Add markers based on test location
        if "unit" in str(item.fspath):
            item.add_marker(pytest.mark.unit)
        elif "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)
        elif "e2e" in str(item.fspath):
            item.add_marker(pytest.mark.e2e)
