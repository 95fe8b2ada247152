"""
Repository pattern implementation for stable-spline-maxent.

This module provides the abstract file repository interface and the CSV and
JSON repositories for datasets, impulse responses and band matrices.
"""

from .interfaces.base import Repository
from .band_matrix_repository import BandMatrixRepository
from .dataset_repository import DatasetRepository, ImpulseResponseRepository

__all__ = [
    'Repository',
    'BandMatrixRepository',
    'DatasetRepository',
    'ImpulseResponseRepository',
]
