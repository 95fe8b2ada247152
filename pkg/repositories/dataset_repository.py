"""
CSV storage for identification datasets and impulse responses.

Datasets use the header ``t,u,y`` with t = 1..N. A simulated dataset starts
with a ``# seed=<int>`` comment line so it can be regenerated.
"""

from pathlib import Path
from typing import Optional
import logging
import re

import numpy as np
import pandas as pd

from domain.entities.sysid_dataset import SysIdDataset
from infrastructure.exceptions import DatasetFormatException, DomainException, RepositoryException
from repositories.interfaces.base import PathLike, Repository


DATASET_COLUMNS = ("t", "u", "y")
IMPULSE_COLUMNS = ("k", "f")
FLOAT_FORMAT = "%.17g"

_SEED_PATTERN = re.compile(r"^#\s*seed\s*=\s*(\d+)\s*$")


def _read_table(path: PathLike, columns, repository: str) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise RepositoryException(f"file not found: {path}", repository)
    try:
        frame = pd.read_csv(path, comment="#", skipinitialspace=True, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DatasetFormatException(f"cannot parse {path}: {e}", original_exception=e)

    frame.columns = [str(c).strip() for c in frame.columns]
    for column in columns:
        if column not in frame.columns:
            raise DatasetFormatException(f"missing column '{column}' in {path}", column)
    if frame.empty:
        raise DatasetFormatException(f"{path} has no data rows")

    for column in columns:
        values = pd.to_numeric(frame[column], errors="coerce")
        if values.isna().any():
            row = int(values.isna().to_numpy().argmax()) + 1
            raise DatasetFormatException(f"column '{column}' has a non-numeric value in data row {row}", column)
        frame[column] = values
    return frame


def _check_index(frame: pd.DataFrame, column: str) -> None:
    expected = np.arange(1, len(frame) + 1)
    if not np.array_equal(frame[column].to_numpy(), expected):
        raise DatasetFormatException(f"column '{column}' must count 1..{len(frame)}", column)


class DatasetRepository(Repository[SysIdDataset]):
    """
    Reads and writes ``t,u,y`` dataset files.
    """

    def __init__(self):
        self._logger = logging.getLogger(__name__)

    def load(self, path: PathLike) -> SysIdDataset:
        """
        Raises:
            DatasetFormatException: Naming the offending column
        """
        frame = _read_table(path, DATASET_COLUMNS, "DatasetRepository")
        _check_index(frame, "t")
        seed = self._read_seed(Path(path))
        try:
            dataset = SysIdDataset(frame["u"].to_numpy(), frame["y"].to_numpy(), seed=seed)
        except DomainException as e:
            raise DatasetFormatException(f"invalid dataset {path}: {e}", original_exception=e)

        self._logger.info(f"Loaded dataset {path}: N={dataset.N}, seed={seed}")
        return dataset

    def save(self, entity: SysIdDataset, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame({
            "t": np.arange(1, entity.N + 1),
            "u": entity.u[:entity.N],
            "y": entity.y,
        })
        with open(path, "w", encoding="utf-8", newline="") as f:
            if entity.seed is not None:
                f.write(f"# seed={entity.seed}\n")
            frame.to_csv(f, index=False, float_format=FLOAT_FORMAT)

        self._logger.info(f"Saved dataset with N={entity.N} to {path}")
        return path

    @staticmethod
    def _read_seed(path: Path) -> Optional[int]:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.startswith("#"):
                    return None
                match = _SEED_PATTERN.match(line.strip())
                if match:
                    return int(match.group(1))
        return None


class ImpulseResponseRepository(Repository[np.ndarray]):
    """
    Reads and writes ``k,f`` impulse-response files (lags 1..n).
    """

    def load(self, path: PathLike) -> np.ndarray:
        frame = _read_table(path, IMPULSE_COLUMNS, "ImpulseResponseRepository")
        _check_index(frame, "k")
        return frame["f"].to_numpy(dtype=float)

    def save(self, entity: np.ndarray, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        f = np.asarray(entity, dtype=float).ravel()
        pd.DataFrame({"k": np.arange(1, f.shape[0] + 1), "f": f}).to_csv(
            path, index=False, float_format=FLOAT_FORMAT
        )
        return path
