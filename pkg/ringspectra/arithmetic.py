"""Structured ring arithmetic that can be tabulated into a FiniteRing."""

from typing import Any, Protocol

import numpy as np


class Arithmetic(Protocol):
    """Protocol for ring constructions that compute their arithmetic
    structurally, e.g., modular integers or polynomial residues.

    Elements are addressed by raw indices in [0, order). The raw enumeration is
    the canonical enumeration of the construction; FiniteRing.from_arithmetic
    renumbers it so that the zero comes first and the unity second.
    """

    @property
    def name(self) -> str:
        """Ring spec string of the construction."""
        raise NotImplementedError

    @property
    def order(self) -> int:
        """Number of elements."""
        raise NotImplementedError

    @property
    def zero(self) -> int:
        """Raw index of the additive identity."""
        raise NotImplementedError

    @property
    def one(self) -> int:
        """Raw index of the multiplicative identity."""
        raise NotImplementedError

    def labels(self) -> list[str]:
        """Human-readable labels in raw order."""
        raise NotImplementedError

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Addition & multiplication tables over raw indices, both of shape
        (order, order).
        """
        raise NotImplementedError


def is_arithmetic(instance: Any) -> bool:
    """Does an instance have the members required by the Arithmetic protocol.
    Use this as a lighter version of isinstance(instance, Arithmetic).
    """
    return all(
        hasattr(instance, member)
        for member in ("name", "order", "zero", "one", "labels", "tables")
    )


def table_dtype(order: int) -> type:
    """Smallest unsigned integer type that can hold element indices."""
    return np.uint16 if order <= np.iinfo(np.uint16).max else np.uint32
