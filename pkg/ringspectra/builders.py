"""Constructors for the ring families & the ring spec DSL.

Ring spec grammar::

    spec     := zn | field | polyquot | nullext | product
    zn       := "zn:" m
    field    := "field:" p "," r
    polyquot := "polyquot:" (zn | field) ";f=" poly
    nullext  := "nullext:" p "," r ";n=" n
    product  := "product:" spec "&" spec
    poly     := e.g. "x^2+2x+1", integer coefficients reduced into the base

Every constructor enumerates its elements canonically: integers ascending for
Z_m, and coefficient vectors lexicographically (constant coefficient most
significant) for quotients, null extensions & products. The zero & the unity
are then moved to indices 0 & 1.
"""

import dataclasses
import itertools
import string
from typing import Optional, Union

import numpy as np
from sympy import ZZ, isprime
from sympy.polys.galoistools import gf_irreducible_p

from .arithmetic import table_dtype
from .common import (
    CapExceededError,
    ElementId,
    InvalidInputError,
    SpecParseError,
    resolve_cap,
)
from .ring import FiniteRing

RING_KINDS = ("zn", "field", "polyquot", "nullext", "product")


def format_int_poly(coeffs: tuple[int, ...], var: str = "x") -> str:
    """Format integer coefficients, ascending by degree, e.g. (1, 2, 1) as
    "x^2+2x+1".
    """
    terms = []
    for degree in range(len(coeffs) - 1, -1, -1):
        c = coeffs[degree]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        magnitude = abs(c)
        if degree == 0:
            body = str(magnitude)
        else:
            body = "" if magnitude == 1 else str(magnitude)
            body += var if degree == 1 else f"{var}^{degree}"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first_body = terms[0]
    text = ("-" if first_sign == "-" else "") + first_body
    return text + "".join(sign + body for sign, body in terms[1:])


@dataclasses.dataclass(frozen=True)
class RingSpec:
    """Validated description of a ring construction. See the module docstring
    for the textual form, which str() reproduces canonically.

    Parameters
    ----------
    kind
        One of "zn", "field", "polyquot", "nullext" and "product".
    modulus
        m of Z_m.
    p, r
        Residue field Fq, q = p^r, of "field" & "nullext".
    n
        Length of the null extension, |R| = q^n.
    base
        Coefficient ring of "polyquot".
    poly
        Integer coefficients of the modulus of "polyquot", ascending.
    factors
        The two factors of "product".
    """

    kind: str
    modulus: Optional[int] = None
    p: Optional[int] = None
    r: Optional[int] = None
    n: Optional[int] = None
    base: Optional["RingSpec"] = None
    poly: Optional[tuple[int, ...]] = None
    factors: Optional[tuple["RingSpec", "RingSpec"]] = None

    def __post_init__(self):
        if self.kind not in RING_KINDS:
            raise InvalidInputError(f"Invalid ring kind: '{self.kind}'.")
        if self.kind == "zn":
            if self.modulus is None or self.modulus < 2:
                raise InvalidInputError(
                    f"Modulus of zn must be at least 2, got {self.modulus}."
                )
        elif self.kind in ("field", "nullext"):
            _check_prime_power(self.p, self.r)
            if self.kind == "nullext" and (self.n is None or self.n < 2):
                raise InvalidInputError(
                    f"Length of nullext must be at least 2, got {self.n}."
                )
        elif self.kind == "polyquot":
            if self.base is None or self.base.kind not in ("zn", "field"):
                raise InvalidInputError("Base of polyquot must be a zn or a field.")
            if not self.poly or len(self.poly) < 2 or self.poly[-1] == 0:
                raise InvalidInputError(
                    "Modulus of polyquot must have degree at least 1."
                )
        elif self.kind == "product":
            if self.factors is None or len(self.factors) != 2:
                raise InvalidInputError("A product needs exactly two factors.")

    def __str__(self) -> str:
        if self.kind == "zn":
            return f"zn:{self.modulus}"
        if self.kind == "field":
            return f"field:{self.p},{self.r}"
        if self.kind == "polyquot":
            assert self.poly is not None
            return f"polyquot:{self.base};f={format_int_poly(self.poly)}"
        if self.kind == "nullext":
            return f"nullext:{self.p},{self.r};n={self.n}"
        assert self.factors is not None
        return f"product:{self.factors[0]}&{self.factors[1]}"

    def order(self) -> int:
        """Order of the ring the spec describes (an upper bound for polyquot
        moduli whose leading coefficient vanishes in the base).
        """
        if self.kind == "zn":
            assert self.modulus is not None
            return self.modulus
        if self.kind == "field":
            assert self.p is not None and self.r is not None
            return self.p**self.r
        if self.kind == "polyquot":
            assert self.base is not None and self.poly is not None
            return self.base.order() ** (len(self.poly) - 1)
        if self.kind == "nullext":
            assert self.p is not None and self.r is not None and self.n is not None
            return self.p ** (self.r * self.n)
        assert self.factors is not None
        return self.factors[0].order() * self.factors[1].order()


def _check_prime_power(p: Optional[int], r: Optional[int]):
    if p is None or not isprime(p):
        raise InvalidInputError(f"Characteristic of a field must be prime, got {p}.")
    if r is None or r < 1:
        raise InvalidInputError(f"Field degree must be at least 1, got {r}.")


def _check_cap(order: int, cap: Optional[int], what: str):
    cap = resolve_cap(cap)
    if order > cap:
        raise CapExceededError(
            f"{what} would have {order} elements, more than the cap {cap}."
        )


def embed_integer(ring: FiniteRing, c: int) -> ElementId:
    """Image of the integer c in a ring, i.e., c * 1."""
    c %= ring.characteristic
    result, addend = 0, 1
    while c:
        if c & 1:
            result = int(ring.add_table[result, addend])
        addend = int(ring.add_table[addend, addend])
        c >>= 1
    return result


@dataclasses.dataclass(frozen=True)
class ModPoly:
    """Monic polynomial over a FiniteRing.

    Parameters
    ----------
    base
        Coefficient ring.
    coeffs
        Element ids of the coefficients, ascending by degree. The last one is 1.
    """

    base: FiniteRing
    coeffs: tuple[ElementId, ...]

    def __post_init__(self):
        if len(self.coeffs) < 2:
            raise InvalidInputError("A modulus polynomial must have degree >= 1.")
        if self.coeffs[-1] != 1:
            raise InvalidInputError("A modulus polynomial must be monic.")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def normalized(
        cls, base: FiniteRing, coeffs: Union[list[ElementId], tuple[ElementId, ...]]
    ) -> "ModPoly":
        """Strip vanishing leading coefficients and divide by the leading
        coefficient, which must be a unit of the base.
        """
        coeffs = [base.check_index(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if len(coeffs) < 2:
            raise InvalidInputError(
                f"Modulus polynomial has degree < 1 over {base.name}."
            )
        if not base.is_unit(coeffs[-1]):
            raise InvalidInputError(
                f"Leading coefficient '{base.label(coeffs[-1])}' of the modulus "
                f"polynomial is not a unit of {base.name}; the polynomial can't "
                "be made monic."
            )
        scale = base.inverse(coeffs[-1])
        return cls(base=base, coeffs=tuple(base.mul(c, scale) for c in coeffs))

    @classmethod
    def from_integers(cls, base: FiniteRing, coeffs: tuple[int, ...]) -> "ModPoly":
        """Reduce integer coefficients, ascending by degree, into the base."""
        return cls.normalized(base, [embed_integer(base, c) for c in coeffs])


def _free_variable(base: FiniteRing) -> str:
    """First of x, y, z, ... not appearing in the labels of the base."""
    used = set("".join(base.labels))
    for var in "xyzwvtsr":
        if var not in used:
            return var
    raise InvalidInputError(f"No free variable name for a quotient of {base.name}.")


def _coefficient_label(label: str) -> str:
    if all(ch in string.digits for ch in label):
        return label
    return f"({label})"


class ModularArithmetic:
    """Arithmetic of Z_m."""

    def __init__(self, modulus: int):
        self._modulus = modulus

    @property
    def name(self) -> str:
        return f"zn:{self._modulus}"

    @property
    def order(self) -> int:
        return self._modulus

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def labels(self) -> list[str]:
        return [str(i) for i in range(self._modulus)]

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        elements = np.arange(self._modulus, dtype=np.int64)
        dtype = table_dtype(self._modulus)
        add = (np.add.outer(elements, elements) % self._modulus).astype(dtype)
        mul = (np.multiply.outer(elements, elements) % self._modulus).astype(dtype)
        return add, mul


class _CoefficientArithmetic:
    """Shared machinery of constructions whose elements are vectors of
    coefficients over a base ring, enumerated lexicographically with the first
    coefficient most significant.
    """

    def __init__(self, base: FiniteRing, length: int, name: str):
        self._base = base
        self._length = length
        self._name = name
        b = base.order
        self._weights = np.array(
            [b ** (length - 1 - i) for i in range(length)], dtype=np.int64
        )
        raw = np.arange(b**length, dtype=np.int64)
        # coefficient vectors of all elements, shape (order, length)
        self._vectors = (raw[:, None] // self._weights[None, :]) % b

    @property
    def name(self) -> str:
        return self._name

    @property
    def order(self) -> int:
        return self._base.order**self._length

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return int(self._weights[0])

    def _encode(self, coefficients: list[np.ndarray]) -> np.ndarray:
        raw = np.zeros(coefficients[0].shape, dtype=np.int64)
        for weight, c in zip(self._weights, coefficients):
            raw += int(weight) * c.astype(np.int64)
        return raw.astype(table_dtype(self.order))

    def _add_tables(self) -> np.ndarray:
        add = self._base.add_table
        v = self._vectors
        return self._encode(
            [add[v[:, None, i], v[None, :, i]] for i in range(self._length)]
        )


class PolyQuotientArithmetic(_CoefficientArithmetic):
    """Arithmetic of base[x]/(f) for a monic f."""

    def __init__(self, modulus: ModPoly, name: str):
        super().__init__(modulus.base, modulus.degree, name)
        self._modulus = modulus
        self._var = _free_variable(modulus.base)

    def labels(self) -> list[str]:
        base = self._base
        labels = []
        for vector in self._vectors:
            terms = []
            for degree in range(self._length - 1, -1, -1):
                c = int(vector[degree])
                if c == 0:
                    continue
                if degree == 0:
                    terms.append(base.labels[c])
                    continue
                coefficient = "" if c == 1 else _coefficient_label(base.labels[c])
                power = self._var if degree == 1 else f"{self._var}^{degree}"
                terms.append(coefficient + power)
            labels.append("+".join(terms) if terms else "0")
        return labels

    def _times_x(self, vectors: np.ndarray) -> np.ndarray:
        """Multiply coefficient vectors, shape (count, degree), by x mod f."""
        add, mul, neg = self._base.add_table, self._base.mul_table, self._base.negation
        carry = vectors[:, -1]
        shifted = np.zeros_like(vectors)
        shifted[:, 1:] = vectors[:, :-1]
        for t, f_t in enumerate(self._modulus.coeffs[:-1]):
            shifted[:, t] = add[shifted[:, t], neg[mul[carry, f_t]]]
        return shifted

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        add, mul = self._base.add_table, self._base.mul_table
        v = self._vectors
        # a * x^j for every element a & every j
        shifted = [v]
        for _ in range(1, self._length):
            shifted.append(self._times_x(shifted[-1]))
        # a * b = sum over j of b_j * (a * x^j)
        product = [
            np.zeros((self.order, self.order), dtype=np.int64)
            for _ in range(self._length)
        ]
        for j in range(self._length):
            b_j = v[None, :, j]
            for i in range(self._length):
                product[i] = add[product[i], mul[shifted[j][:, None, i], b_j]]
        return self._add_tables(), self._encode(product)


class NullExtensionArithmetic(_CoefficientArithmetic):
    """Arithmetic of Fq + V with V = Fq^(n-1) & (a, v)(b, w) = (ab, aw + bv)."""

    def labels(self) -> list[str]:
        names = self._base.labels
        return [
            f"({names[vector[0]]}|{','.join(names[c] for c in vector[1:])})"
            for vector in self._vectors
        ]

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        add, mul = self._base.add_table, self._base.mul_table
        v = self._vectors
        a, b = v[:, None, 0], v[None, :, 0]
        product = [mul[a, b]]
        for i in range(1, self._length):
            product.append(add[mul[a, v[None, :, i]], mul[b, v[:, None, i]]])
        return self._add_tables(), self._encode(product)


class ProductArithmetic:
    """Arithmetic of the direct product R x S."""

    def __init__(self, first: FiniteRing, second: FiniteRing, name: str):
        self._first = first
        self._second = second
        self._name = name

    @property
    def name(self) -> str:
        return self._name

    @property
    def order(self) -> int:
        return self._first.order * self._second.order

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return self._second.order + 1

    def labels(self) -> list[str]:
        return [
            f"({a},{b})"
            for a, b in itertools.product(self._first.labels, self._second.labels)
        ]

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        m = self._second.order
        raw = np.arange(self.order, dtype=np.int64)
        x, y = raw // m, raw % m
        tables = []
        for first, second in (
            (self._first.add_table, self._second.add_table),
            (self._first.mul_table, self._second.mul_table),
        ):
            combined = first[x[:, None], x[None, :]].astype(np.int64) * m
            combined += second[y[:, None], y[None, :]]
            tables.append(combined.astype(table_dtype(self.order)))
        return tables[0], tables[1]


def build_zn(m: int, cap: Optional[int] = None) -> FiniteRing:
    """Z_m, element i labeled "i"."""
    if isinstance(m, bool) or not isinstance(m, int) or m < 2:
        raise InvalidInputError(f"Modulus of Z_m must be an integer >= 2, got {m}.")
    _check_cap(m, cap, f"zn:{m}")
    return FiniteRing.from_arithmetic(ModularArithmetic(m))


def smallest_irreducible(p: int, r: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible polynomial of degree r over
    Z_p, comparing coefficients from the highest non-leading degree down.
    Returns integer coefficients ascending by degree.
    """
    for lower in itertools.product(range(p), repeat=r):
        descending = [1, *lower]
        if gf_irreducible_p(descending, p, ZZ):
            return tuple(reversed(descending))
    raise RuntimeError(f"No irreducible polynomial of degree {r} over Z_{p}.")


def build_field(p: int, r: int, cap: Optional[int] = None) -> FiniteRing:
    """Field of order p^r, Z_p[x]/(f) for the smallest irreducible f."""
    _check_prime_power(p, r)
    name = f"field:{p},{r}"
    _check_cap(p**r, cap, name)
    prime_field = build_zn(p, cap)
    if r == 1:
        return dataclasses.replace(prime_field, name=name)
    modulus = ModPoly.from_integers(prime_field, smallest_irreducible(p, r))
    return FiniteRing.from_arithmetic(PolyQuotientArithmetic(modulus, name))


def build_poly_quotient(
    base: FiniteRing,
    f: ModPoly,
    cap: Optional[int] = None,
    name: Optional[str] = None,
) -> FiniteRing:
    """base[x]/(f) for a monic f, elements labeled as polynomials in the first
    variable name free in the labels of the base.
    """
    if f.base is not base:
        raise InvalidInputError("Modulus polynomial is over a different ring.")
    if name is None:
        coeffs = ",".join(base.labels[c] for c in f.coeffs)
        name = f"polyquot:{base.name};f=[{coeffs}]"
    _check_cap(base.order**f.degree, cap, name)
    return FiniteRing.from_arithmetic(PolyQuotientArithmetic(f, name))


def build_null_extension(
    q_spec: tuple[int, int],
    n: int,
    cap: Optional[int] = None,
) -> FiniteRing:
    """Fq + Fq^(n-1) with a zero product on the second summand, q = p^r."""
    p, r = q_spec
    _check_prime_power(p, r)
    if n < 2:
        raise InvalidInputError(f"Length of a null extension must be >= 2, got {n}.")
    name = f"nullext:{p},{r};n={n}"
    _check_cap((p**r) ** n, cap, name)
    field = build_field(p, r, cap)
    return FiniteRing.from_arithmetic(NullExtensionArithmetic(field, n, name))


def build_product(
    first: FiniteRing,
    second: FiniteRing,
    cap: Optional[int] = None,
) -> FiniteRing:
    """Direct product, elements labeled "(a,b)". Never local."""
    name = f"product:{first.name}&{second.name}"
    _check_cap(first.order * second.order, cap, name)
    return FiniteRing.from_arithmetic(ProductArithmetic(first, second, name))


def build_ring(spec: Union[str, RingSpec], cap: Optional[int] = None) -> FiniteRing:
    """Build the ring a spec, or the text of a spec, describes."""
    if isinstance(spec, str):
        spec = parse_ring_spec(spec)
    if spec.kind == "zn":
        assert spec.modulus is not None
        return build_zn(spec.modulus, cap)
    if spec.kind == "field":
        assert spec.p is not None and spec.r is not None
        return build_field(spec.p, spec.r, cap)
    if spec.kind == "nullext":
        assert spec.p is not None and spec.r is not None and spec.n is not None
        return build_null_extension((spec.p, spec.r), spec.n, cap)
    if spec.kind == "polyquot":
        assert spec.base is not None and spec.poly is not None
        base = build_ring(spec.base, cap)
        f = ModPoly.from_integers(base, spec.poly)
        return build_poly_quotient(base, f, cap, name=str(spec))
    assert spec.factors is not None
    first, second = (build_ring(factor, cap) for factor in spec.factors)
    return build_product(first, second, cap)


class _SpecParser:
    """Recursive-descent parser of the ring spec DSL."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, position: Optional[int] = None) -> SpecParseError:
        return SpecParseError(
            message, self.text, self.pos if position is None else position
        )

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, literal: str):
        if not self.text.startswith(literal, self.pos):
            raise self.error(f"Expected '{literal}'")
        self.pos += len(literal)

    def integer(self) -> int:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        if start == self.pos:
            raise self.error("Expected an integer")
        return int(self.text[start : self.pos])

    def spec(self) -> RingSpec:
        start = self.pos
        while self.peek().isalpha():
            self.pos += 1
        kind = self.text[start : self.pos]
        if kind not in RING_KINDS:
            raise self.error(f"Unknown ring kind '{kind}'", start)
        self.expect(":")
        try:
            if kind == "zn":
                return RingSpec(kind, modulus=self.integer())
            if kind == "field":
                p = self.integer()
                self.expect(",")
                return RingSpec(kind, p=p, r=self.integer())
            if kind == "nullext":
                p = self.integer()
                self.expect(",")
                r = self.integer()
                self.expect(";n=")
                return RingSpec(kind, p=p, r=r, n=self.integer())
            if kind == "polyquot":
                base = self.spec()
                self.expect(";f=")
                return RingSpec(kind, base=base, poly=self.poly())
            first = self.spec()
            self.expect("&")
            return RingSpec(kind, factors=(first, self.spec()))
        except SpecParseError:
            raise
        except InvalidInputError as e:
            raise self.error(str(e).rstrip("."), start) from e

    def poly(self) -> tuple[int, ...]:
        start = self.pos
        coeffs: dict[int, int] = {}
        var: Optional[str] = None
        first = True
        while True:
            sign = 1
            if self.peek() and self.peek() in "+-":
                sign = -1 if self.peek() == "-" else 1
                self.pos += 1
            elif not first:
                break
            term_start = self.pos
            coefficient = self.integer() if self.peek().isdigit() else None
            degree = 0
            if self.peek() == "*" and coefficient is not None:
                self.pos += 1
            if self.peek().isalpha() and self.peek() in string.ascii_lowercase:
                if var is not None and self.peek() != var:
                    raise self.error(f"Mixed variables '{var}' and '{self.peek()}'")
                var = self.peek()
                self.pos += 1
                degree = 1
                if self.peek() == "^":
                    self.pos += 1
                    degree = self.integer()
            elif coefficient is None:
                raise self.error("Expected a polynomial term", term_start)
            value = sign * (1 if coefficient is None else coefficient)
            coeffs[degree] = coeffs.get(degree, 0) + value
            first = False
        if start == self.pos:
            raise self.error("Expected a polynomial")
        top = max([d for d, c in coeffs.items() if c != 0], default=0)
        return tuple(coeffs.get(d, 0) for d in range(top + 1))


def parse_ring_spec(text: str) -> RingSpec:
    """Parse the textual form of a ring spec, e.g. "polyquot:zn:2;f=x^3".
    Whitespace is ignored.
    """
    compact = "".join(text.split())
    parser = _SpecParser(compact)
    spec = parser.spec()
    if parser.pos != len(compact):
        raise parser.error("Unexpected trailing input")
    return spec
