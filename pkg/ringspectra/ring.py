"""Finite commutative rings with unity, stored as dense arithmetic tables."""

import dataclasses
import functools
from typing import Optional

import numpy as np

from .arithmetic import Arithmetic, is_arithmetic, table_dtype
from .common import (
    EXHAUSTIVE_AXIOM_ORDER,
    ElementId,
    InvalidInputError,
    NotInvertibleError,
)


@dataclasses.dataclass(frozen=True, eq=False)
class FiniteRing:
    """Finite commutative ring with unity.

    Element 0 is the additive identity and element 1 the multiplicative
    identity. The tables are read-only after construction, so a FiniteRing can
    be shared freely.

    Parameters
    ----------
    add_table
        Array of shape (order, order), add_table[a, b] is the index of a + b.
    mul_table
        Array of shape (order, order), mul_table[a, b] is the index of a * b.
    labels
        Human-readable element names, unique.
    name
        Ring spec string the ring was built from.
    """

    add_table: np.ndarray
    mul_table: np.ndarray
    labels: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        order = len(self.labels)
        if order < 2:
            raise InvalidInputError("A ring must have at least two elements.")
        for table in (self.add_table, self.mul_table):
            if table.shape != (order, order):
                raise InvalidInputError(
                    f"Arithmetic table of shape {table.shape} doesn't match "
                    f"{order} labels."
                )
            table.flags.writeable = False
        if len(set(self.labels)) != order:
            raise InvalidInputError("Element labels must be unique.")
        everything = np.arange(order)
        if not np.array_equal(self.add_table[0], everything):
            raise InvalidInputError("Element 0 must be the additive identity.")
        if not np.array_equal(self.mul_table[1], everything):
            raise InvalidInputError("Element 1 must be the multiplicative identity.")
        if np.any(self.mul_table[0] != 0):
            raise InvalidInputError("Element 0 must annihilate every element.")
        if not np.array_equal(self.mul_table, self.mul_table.T):
            raise InvalidInputError("Multiplication must be commutative.")

    @classmethod
    def from_arithmetic(cls, arithmetic: Arithmetic) -> "FiniteRing":
        """Tabulate a structured arithmetic and renumber its elements so that
        the zero is element 0 and the unity element 1. Other elements keep
        their relative raw order.
        """
        if not is_arithmetic(arithmetic):
            raise TypeError(f"Invalid arithmetic type: '{arithmetic}'.")
        order = arithmetic.order
        raw_add, raw_mul = arithmetic.tables()
        raw_labels = arithmetic.labels()

        head = [arithmetic.zero, arithmetic.one]
        rest = [i for i in range(order) if i not in head]
        # perm[new] = raw, renumber[raw] = new
        perm = np.array(head + rest, dtype=np.int64)
        renumber = np.empty(order, dtype=table_dtype(order))
        renumber[perm] = np.arange(order)

        add_table = renumber[raw_add[np.ix_(perm, perm)]]
        mul_table = renumber[raw_mul[np.ix_(perm, perm)]]
        labels = tuple(raw_labels[i] for i in perm)
        return cls(
            add_table=add_table,
            mul_table=mul_table,
            labels=labels,
            name=arithmetic.name,
        )

    @property
    def order(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"FiniteRing({self.name or '?'}, order={self.order})"

    def check_index(self, a: ElementId) -> ElementId:
        """Return a as an int, raise an InvalidInputError if it's not a valid
        element index.
        """
        if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
            raise InvalidInputError(f"Invalid element index type: '{a}'.")
        if not 0 <= a < self.order:
            raise InvalidInputError(
                f"Element index {a} out of range for a ring of order {self.order}."
            )
        return int(a)

    def label(self, a: ElementId) -> str:
        return self.labels[self.check_index(a)]

    def element_by_label(self, label: str) -> ElementId:
        """Index of the element with the given label. Whitespace is ignored."""
        key = "".join(label.split())
        try:
            return self._label_index[key]
        except KeyError:
            raise InvalidInputError(
                f"No element labeled '{label}' in {self.name or 'the ring'}."
            ) from None

    @functools.cached_property
    def _label_index(self) -> dict[str, int]:
        return {"".join(label.split()): i for i, label in enumerate(self.labels)}

    def add(self, a: ElementId, b: ElementId) -> ElementId:
        return int(self.add_table[self.check_index(a), self.check_index(b)])

    def mul(self, a: ElementId, b: ElementId) -> ElementId:
        return int(self.mul_table[self.check_index(a), self.check_index(b)])

    def negate(self, a: ElementId) -> ElementId:
        return int(self.negation[self.check_index(a)])

    def subtract(self, a: ElementId, b: ElementId) -> ElementId:
        return self.add(a, self.negate(b))

    @functools.cached_property
    def negation(self) -> np.ndarray:
        """negation[a] is the index of -a."""
        negation = np.argmax(self.add_table == 0, axis=1)
        negation.flags.writeable = False
        return negation

    def power(self, a: ElementId, exponent: int) -> ElementId:
        """a raised to a non-negative integer power, with a^0 = 1."""
        if exponent < 0:
            raise InvalidInputError(f"Negative exponent {exponent}.")
        base = self.check_index(a)
        result = 1
        while exponent:
            if exponent & 1:
                result = int(self.mul_table[result, base])
            base = int(self.mul_table[base, base])
            exponent >>= 1
        return result

    @functools.cached_property
    def unit_mask(self) -> np.ndarray:
        """Boolean mask of the invertible elements."""
        mask = np.any(self.mul_table == 1, axis=1)
        mask.flags.writeable = False
        return mask

    @functools.cached_property
    def units(self) -> tuple[ElementId, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.unit_mask))

    @functools.cached_property
    def nonunits(self) -> tuple[ElementId, ...]:
        return tuple(int(i) for i in np.flatnonzero(~self.unit_mask))

    def is_unit(self, a: ElementId) -> bool:
        return bool(self.unit_mask[self.check_index(a)])

    def inverse(self, a: ElementId) -> ElementId:
        a = self.check_index(a)
        candidates = np.flatnonzero(self.mul_table[a] == 1)
        if candidates.size == 0:
            raise NotInvertibleError(
                f"Element '{self.labels[a]}' of {self.name or 'the ring'} is not "
                "invertible."
            )
        return int(candidates[0])

    def multiplicative_order(self, a: ElementId) -> int:
        """Smallest m >= 1 with a^m = 1. Only defined for units."""
        a = self.check_index(a)
        if not self.unit_mask[a]:
            raise NotInvertibleError(
                f"Element '{self.labels[a]}' has no multiplicative order."
            )
        m, x = 1, a
        while x != 1:
            x = int(self.mul_table[x, a])
            m += 1
        return m

    @functools.cached_property
    def characteristic(self) -> int:
        """Additive order of the unity."""
        c, x = 1, 1
        while x != 0:
            x = int(self.add_table[x, 1])
            c += 1
        return c

    def square_roots(self, u: ElementId) -> frozenset[ElementId]:
        """All s with s * s = u, found by enumeration."""
        u = self.check_index(u)
        return frozenset(int(s) for s in np.flatnonzero(self.squares == u))

    @functools.cached_property
    def squares(self) -> np.ndarray:
        """squares[s] is the index of s * s."""
        return np.diagonal(self.mul_table).copy()

    def check_axioms(
        self,
        samples: int = 10_000,
        seed: int = 0,
        exhaustive_order: Optional[int] = None,
    ) -> list[str]:
        """Check the commutative ring axioms. Rings up to exhaustive_order
        elements (default 256) are checked over all triples, larger ones over
        `samples` random triples.

        Returns
        -------
        violations
            Names of the violated axioms, empty if none.
        """
        if exhaustive_order is None:
            exhaustive_order = EXHAUSTIVE_AXIOM_ORDER
        n = self.order
        add, mul = self.add_table, self.mul_table
        if n <= exhaustive_order:
            a, b, c = np.meshgrid(
                np.arange(n), np.arange(n), np.arange(n), indexing="ij", sparse=True
            )
        else:
            rng = np.random.default_rng(seed)
            a, b, c = rng.integers(0, n, size=(3, samples))

        violations = []
        if not np.array_equal(add, add.T):
            violations.append("additive commutativity")
        if not np.array_equal(mul, mul.T):
            violations.append("multiplicative commutativity")
        if np.any(add[add[a, b], c] != add[a, add[b, c]]):
            violations.append("additive associativity")
        if np.any(mul[mul[a, b], c] != mul[a, mul[b, c]]):
            violations.append("multiplicative associativity")
        if np.any(mul[a, add[b, c]] != add[mul[a, b], mul[a, c]]):
            violations.append("distributivity")
        if not np.all(np.any(add == 0, axis=1)):
            violations.append("additive inverses")
        return violations
