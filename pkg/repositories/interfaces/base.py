"""
Base repository interface for file-backed repositories.

This module defines the generic contract every repository follows: load an
entity from a path and save it back, raising ``RepositoryException``
subclasses on malformed content.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, TypeVar, Union

T = TypeVar('T')

PathLike = Union[str, Path]


class Repository(Generic[T], ABC):
    """
    Base repository interface providing load/save operations.
    """

    @abstractmethod
    def load(self, path: PathLike) -> T:
        """
        Read an entity from a file.

        Args:
            path: Source file

        Returns:
            The parsed entity

        Raises:
            RepositoryException: If the file is missing or malformed
        """
        pass

    @abstractmethod
    def save(self, entity: T, path: PathLike) -> Path:
        """
        Write an entity to a file, creating parent directories.

        Args:
            entity: The entity to store
            path: Target file

        Returns:
            The path written
        """
        pass

    def exists(self, path: PathLike) -> bool:
        """Check whether a source file exists."""
        return Path(path).is_file()
