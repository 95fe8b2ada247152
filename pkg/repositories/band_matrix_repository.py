"""
JSON storage for partially specified band matrices.

Document layout: ``{"n": int, "m": int, "diagonals": [[...], ...]}`` where
``diagonals[k]`` lists the n - k entries of the k-th superdiagonal.
"""

from pathlib import Path
import json
import logging

from domain.entities.partial_band_matrix import PartialBandMatrix
from infrastructure.exceptions import BandMatrixFormatException, DomainException, RepositoryException
from repositories.interfaces.base import PathLike, Repository


REQUIRED_KEYS = ("n", "m", "diagonals")


class BandMatrixRepository(Repository[PartialBandMatrix]):
    """
    Reads and writes band-matrix JSON documents.
    """

    def __init__(self):
        self._logger = logging.getLogger(__name__)

    def load(self, path: PathLike) -> PartialBandMatrix:
        """
        Raises:
            BandMatrixFormatException: If the document is not valid band JSON
        """
        path = Path(path)
        if not path.is_file():
            raise RepositoryException(f"file not found: {path}", "BandMatrixRepository")
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise BandMatrixFormatException(f"invalid JSON in {path}: {e}", e)

        partial = self.from_document(document)
        self._logger.info(f"Loaded band matrix {path}: n={partial.n}, m={partial.m}")
        return partial

    @staticmethod
    def from_document(document) -> PartialBandMatrix:
        if not isinstance(document, dict):
            raise BandMatrixFormatException("band matrix document must be a JSON object")
        missing = [key for key in REQUIRED_KEYS if key not in document]
        if missing:
            raise BandMatrixFormatException(f"missing key(s): {', '.join(missing)}")
        for key in ("n", "m"):
            # bool is an int subclass; 3.0 and "3" are not accepted either
            if isinstance(document[key], bool) or not isinstance(document[key], int):
                raise BandMatrixFormatException(f"'{key}' must be an integer, got {document[key]!r}")
        if not isinstance(document["diagonals"], list) or not all(
                isinstance(d, list) for d in document["diagonals"]):
            raise BandMatrixFormatException("'diagonals' must be a list of lists")
        try:
            return PartialBandMatrix.from_dict(document)
        except (TypeError, ValueError, DomainException) as e:
            raise BandMatrixFormatException(f"inconsistent band matrix: {e}", e)

    def save(self, entity: PartialBandMatrix, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(entity.to_dict(), f, indent=2)
        return path
