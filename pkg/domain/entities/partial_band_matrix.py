"""
Partially specified symmetric band matrix.

Only the entries with ``|i - j| <= m`` are known. They are stored as
``m + 1`` diagonals of lengths ``n, n-1, ..., n-m`` so symmetry holds by
construction.
"""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from domain.entities.stable_spline_kernel import StableSplineKernel
from infrastructure.exceptions import DimensionMismatchException, ValidationException


@dataclass(frozen=True, eq=False)
class PartialBandMatrix:
    """
    Symmetric n x n matrix specified on the band ``|i - j| <= m``.

    ``diagonals[k][i]`` holds the (0-based) entry ``(i, i + k)``.
    """

    n: int
    m: int
    diagonals: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationException("n", "matrix order must be a positive integer", self.n)
        if isinstance(self.m, bool) or int(self.m) != self.m or not 0 <= self.m < self.n:
            raise ValidationException("m", f"bandwidth must satisfy 0 <= m < n = {self.n}", self.m)
        if len(self.diagonals) != self.m + 1:
            raise DimensionMismatchException("diagonals", self.m + 1, len(self.diagonals))

        frozen = []
        for k, diagonal in enumerate(self.diagonals):
            values = np.array(diagonal, dtype=float)
            if values.shape != (self.n - k,):
                raise DimensionMismatchException(f"diagonals[{k}]", self.n - k, values.shape)
            if not np.all(np.isfinite(values)):
                raise ValidationException(f"diagonals[{k}]", "band entries must be finite", values)
            values.setflags(write=False)
            frozen.append(values)
        object.__setattr__(self, "diagonals", tuple(frozen))

    @classmethod
    def from_dense(cls, matrix: np.ndarray, m: int) -> "PartialBandMatrix":
        """
        Band restriction of a dense matrix (upper triangle is read).

        Args:
            matrix: Square matrix, assumed symmetric
            m: Bandwidth to keep
        """
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchException("matrix", "square", matrix.shape)
        return cls(matrix.shape[0], m, tuple(np.diagonal(matrix, k).copy() for k in range(m + 1)))

    @classmethod
    def from_kernel_moments(cls, kernel: StableSplineKernel, m: int = 1) -> "PartialBandMatrix":
        """The m-band restriction of a stable spline kernel."""
        return cls.from_dense(kernel.to_dense(), m)

    def entry(self, i: int, j: int) -> float:
        """
        Specified entry at 0-based position (i, j).

        Raises:
            ValidationException: If (i, j) lies outside the band
        """
        k = abs(i - j)
        if k > self.m:
            raise ValidationException("index", f"({i}, {j}) is not specified in a {self.m}-band matrix", (i, j))
        return float(self.diagonals[k][min(i, j)])

    def is_fully_specified(self) -> bool:
        return self.m == self.n - 1

    def free_pairs(self) -> List[Tuple[int, int]]:
        """Unspecified pairs (i, j), i < j, diagonal by diagonal, left to right."""
        return [(i, i + k) for k in range(self.m + 1, self.n) for i in range(self.n - k)]

    def band_blocks(self) -> Iterator[Tuple[int, np.ndarray]]:
        """
        The ``n - m`` contiguous ``(m+1) x (m+1)`` principal blocks.

        Yields:
            (0-based start index, dense block)
        """
        size = self.m + 1
        for start in range(self.n - self.m):
            block = np.empty((size, size))
            for a in range(size):
                for b in range(a, size):
                    block[a, b] = block[b, a] = self.diagonals[b - a][start + a]
            yield start, block

    def to_dense(self, fill_value: float = np.nan) -> np.ndarray:
        """Dense matrix with ``fill_value`` at unspecified positions."""
        dense = np.full((self.n, self.n), fill_value, dtype=float)
        for k, diagonal in enumerate(self.diagonals):
            idx = np.arange(self.n - k)
            dense[idx, idx + k] = diagonal
            dense[idx + k, idx] = diagonal
        return dense

    def band_mask(self) -> np.ndarray:
        """Boolean mask of specified positions."""
        idx = np.arange(self.n)
        return np.abs(np.subtract.outer(idx, idx)) <= self.m

    def restrict(self, start: int, stop: int, m: Optional[int] = None) -> "PartialBandMatrix":
        """
        Principal sub-pattern on rows/columns ``start..stop-1``.

        Args:
            start: First index (0-based, inclusive)
            stop: Last index (exclusive)
            m: Bandwidth of the result, at most ``min(self.m, size-1)``
        """
        size = stop - start
        bandwidth = min(self.m, size - 1) if m is None else m
        if bandwidth > min(self.m, size - 1):
            raise ValidationException("m", "restriction cannot widen the specified band", bandwidth)
        return PartialBandMatrix(
            size, bandwidth,
            tuple(self.diagonals[k][start:stop - k] for k in range(bandwidth + 1)),
        )

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "diagonals": [d.tolist() for d in self.diagonals]}

    @classmethod
    def from_dict(cls, data: dict) -> "PartialBandMatrix":
        return cls(int(data["n"]), int(data["m"]), tuple(data["diagonals"]))
