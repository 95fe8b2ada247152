"""
Input/output record of a linear system identification experiment.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from infrastructure.exceptions import DimensionMismatchException, ValidationException


@dataclass(frozen=True, eq=False)
class SysIdDataset:
    """
    Input sequence ``u`` and output sequence ``y`` of N samples.

    ``u[t-1]`` and ``y[t-1]`` hold the samples at time t = 1..N. Inputs
    before t = 1 are zero. ``seed`` records how a simulated dataset was
    generated and is None for measured data.
    """

    u: np.ndarray
    y: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        u = np.array(self.u, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if y.shape[0] < 1:
            raise ValidationException("y", "dataset needs at least one output sample", y.shape[0])
        if u.shape[0] < y.shape[0]:
            raise DimensionMismatchException("u", f">= {y.shape[0]}", u.shape[0])
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise ValidationException("data", "input and output samples must be finite")
        u.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    @property
    def N(self) -> int:
        """Number of output samples."""
        return int(self.y.shape[0])

    def default_fir_order(self, cap: int = 100) -> int:
        """``min(cap, N // 2)``, at least 1."""
        return max(1, min(cap, self.N // 2))

    def is_degenerate(self) -> bool:
        """True when the input carries no excitation at all."""
        return not np.any(self.u[: max(self.N - 1, 0)])
