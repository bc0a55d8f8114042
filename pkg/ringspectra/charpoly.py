"""Exact characteristic polynomials p(λ) = det(A - λI) of integer matrices."""

import collections
import dataclasses
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from sympy import QQ, ZZ
from sympy.polys.densearith import dup_mul, dup_pow
from sympy.polys.matrices import DomainMatrix

from .common import InvalidInputError, PreconditionError, UnsupportedMatrixError
from .matrix import ProductMatrix

VARIABLE = "λ"

MatrixLike = Union[ProductMatrix, np.ndarray, Sequence[Sequence[int]]]


@dataclasses.dataclass(frozen=True)
class IntPoly:
    """Polynomial with integer coefficients, ascending by degree. Trailing
    zeros are stripped, the zero polynomial has no coefficients.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = [int(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @property
    def degree(self) -> int:
        """Degree, -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        return poly_mul(self, other)

    def __pow__(self, exponent: int) -> "IntPoly":
        if exponent < 0:
            raise ValueError(f"Negative exponent {exponent}.")
        return IntPoly(tuple(reversed(dup_pow(self._dup(), exponent, ZZ))))

    def __call__(self, x: int) -> int:
        value = 0
        for c in reversed(self.coeffs):
            value = value * x + c
        return value

    def _dup(self) -> list:
        """Coefficients in sympy's dense univariate form, descending."""
        return [ZZ(c) for c in reversed(self.coeffs)]

    def __str__(self) -> str:
        terms = []
        for degree in range(self.degree, -1, -1):
            c = self.coeffs[degree]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            magnitude = abs(c)
            if degree == 0:
                body = str(magnitude)
            else:
                body = "" if magnitude == 1 else str(magnitude)
                body += VARIABLE if degree == 1 else f"{VARIABLE}^{degree}"
            terms.append(sign + body)
        if not terms:
            return "0"
        text = "".join(terms)
        return text[1:] if text.startswith("+") else text

    def to_json(self) -> dict:
        return {"coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, document: dict) -> "IntPoly":
        return cls(tuple(int(c) for c in document["coeffs"]))

    @classmethod
    def monomial(cls, degree: int, coefficient: int = 1) -> "IntPoly":
        return cls((0,) * degree + (coefficient,))


LAMBDA = IntPoly((0, 1))


def linear(c: int) -> IntPoly:
    """λ + c."""
    return IntPoly((c, 1))


def poly_mul(a: IntPoly, b: IntPoly) -> IntPoly:
    return IntPoly(tuple(reversed(dup_mul(a._dup(), b._dup(), ZZ))))


def poly_equal(a: IntPoly, b: IntPoly) -> bool:
    return a.coeffs == b.coeffs


@dataclasses.dataclass(frozen=True)
class FactoredPoly:
    """scalar * product of factor^multiplicity. Factors of multiplicity 0 are
    dropped.
    """

    scalar: int
    factors: tuple[tuple[IntPoly, int], ...] = ()

    def __post_init__(self):
        for factor, multiplicity in self.factors:
            if multiplicity < 0:
                raise ValueError(
                    f"Negative multiplicity {multiplicity} of factor {factor}."
                )
        kept = tuple((f, m) for f, m in self.factors if m > 0)
        object.__setattr__(self, "factors", kept)

    def expand(self) -> IntPoly:
        return expand(self)

    def __str__(self) -> str:
        lone = self.scalar == 1 and len(self.factors) == 1
        body = ""
        for factor, multiplicity in self.factors:
            text = str(factor)
            if factor != LAMBDA and not (lone and multiplicity == 1):
                text = f"({text})"
            body += text if multiplicity == 1 else f"{text}^{multiplicity}"
        if not body:
            return str(self.scalar)
        if self.scalar == 1:
            return body
        if self.scalar == -1:
            return "-" + body
        return f"{self.scalar}{body}"

    def to_json(self) -> dict:
        return {
            "scalar": str(self.scalar),
            "factors": [
                {**factor.to_json(), "multiplicity": multiplicity}
                for factor, multiplicity in self.factors
            ],
        }


def expand(factored: FactoredPoly) -> IntPoly:
    """Multiply out the factors with their multiplicities and the scalar."""
    result = [ZZ(factored.scalar)]
    for factor, multiplicity in factored.factors:
        result = dup_mul(result, dup_pow(factor._dup(), multiplicity, ZZ), ZZ)
    return IntPoly(tuple(reversed(result)))


def _as_array(matrix: MatrixLike) -> np.ndarray:
    if isinstance(matrix, ProductMatrix):
        return matrix.dense()
    array = np.asarray(matrix)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise InvalidInputError(f"Matrix of shape {array.shape} is not square.")
    return array


def _domain_matrix(array: np.ndarray, domain) -> DomainMatrix:
    """Sparse DomainMatrix of an integer array."""
    rows: dict[int, dict[int, object]] = {}
    for i, j in zip(*np.nonzero(array)):
        rows.setdefault(int(i), {})[int(j)] = domain(int(array[i, j]))
    return DomainMatrix(rows, array.shape, domain)


def _from_monic(descending: Iterable, size: int) -> IntPoly:
    """det(M - λI) from the coefficients of det(λI - M), descending."""
    sign = -1 if size % 2 else 1
    return IntPoly(tuple(sign * int(c) for c in reversed(list(descending))))


def charpoly_dense(matrix: MatrixLike) -> IntPoly:
    """Characteristic polynomial by the division-free Berkowitz algorithm over
    the integers.
    """
    array = _as_array(matrix)
    if array.shape[0] == 0:
        return IntPoly((1,))
    return _from_monic(_domain_matrix(array, ZZ).charpoly(), array.shape[0])


def determinant(matrix: MatrixLike) -> int:
    """Determinant by fraction-free elimination."""
    array = _as_array(matrix)
    return int(_domain_matrix(array, ZZ).to_dense().det())


def _compressed_charpoly(block: np.ndarray) -> IntPoly:
    """Characteristic polynomial of a symmetric 0/1 block from the action of
    the block on its column space.

    With P the pivot columns, A[:, P] is a basis of the column space and
    A A[:, P] = A[:, P] C for C = A[P, P]^-1 (A^2)[P, P]. A[P, P] is
    nonsingular for symmetric A. So det(A - λI) = (-λ)^(m - r) det(C - λI).
    """
    m = block.shape[0]
    _, pivots = _domain_matrix(block, QQ).rref()
    pivots = list(pivots)
    r = len(pivots)
    if r == 0:
        return IntPoly.monomial(m, -1 if m % 2 else 1)
    columns = block[:, pivots].astype(np.int64)
    square = columns.T @ columns
    top = _domain_matrix(block[np.ix_(pivots, pivots)].astype(np.int64), QQ)
    compression = top.lu_solve(_domain_matrix(square, QQ))
    coefficients = list(compression.charpoly())
    for c in coefficients:
        if QQ.denom(c) != 1:
            raise ArithmeticError(
                f"Compressed characteristic polynomial has a non-integral "
                f"coefficient {c}."
            )
    nonzero_part = _from_monic((QQ.numer(c) for c in coefficients), r)
    return poly_mul(IntPoly.monomial(m - r, -1 if (m - r) % 2 else 1), nonzero_part)


def connected_blocks(array: np.ndarray) -> list[np.ndarray]:
    """Index arrays of the connected components of a symmetric matrix."""
    count, labels = connected_components(csr_matrix(array), directed=False)
    return [np.flatnonzero(labels == c) for c in range(count)]


def charpoly_lowrank(matrix: MatrixLike) -> IntPoly:
    """Characteristic polynomial of a symmetric 0/1 matrix, the product of
    the compressed polynomials of its connected components. Equal components
    are compressed once.
    """
    array = _as_array(matrix)
    if not np.array_equal(array, array.T):
        raise UnsupportedMatrixError(
            "The low-rank characteristic polynomial needs a symmetric matrix."
        )
    if not np.all((array == 0) | (array == 1)):
        raise UnsupportedMatrixError(
            "The low-rank characteristic polynomial needs a 0/1 matrix."
        )
    counts: collections.Counter = collections.Counter()
    blocks: dict[tuple, np.ndarray] = {}
    for members in connected_blocks(array):
        block = array[np.ix_(members, members)].astype(np.uint8)
        key = (block.shape[0], block.tobytes())
        counts[key] += 1
        blocks.setdefault(key, block)
    result = [ZZ(1)]
    for key, count in counts.items():
        factor = _compressed_charpoly(blocks[key])
        result = dup_mul(result, dup_pow(factor._dup(), count, ZZ), ZZ)
    return IntPoly(tuple(reversed(result)))


def _rational_matrix(block) -> DomainMatrix:
    array = np.atleast_2d(np.asarray(block, dtype=object))
    return DomainMatrix(
        [[QQ(int(v)) for v in row] for row in array], array.shape, QQ
    )


def schur_det_reduce(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray
) -> tuple[object, object]:
    """Both sides of det([[A, B], [C, D]]) = det(A) det(D - C A^-1 B), as
    exact rationals. Raises a RuntimeError if they differ.
    """
    a, b, c, d = (_rational_matrix(x) for x in (a, b, c, d))
    conformal = (
        a.shape[0] == a.shape[1] == b.shape[0] == c.shape[1]
        and d.shape == (c.shape[0], b.shape[1])
    )
    if not conformal:
        raise InvalidInputError("Blocks of a Schur reduction are not conformal.")
    det_a = a.det()
    if det_a == 0:
        raise PreconditionError("Top-left block of the Schur reduction is singular.")
    full = a.hstack(b).vstack(c.hstack(d))
    lhs = full.det()
    rhs = det_a * (d - c * a.inv() * b).det()
    if lhs != rhs:
        raise RuntimeError(f"Schur reduction disagrees: {lhs} != {rhs}.")
    return lhs, rhs


def bipartite_block(i: int, j: int) -> np.ndarray:
    """C_{i,j}, zero diagonal blocks of sizes i & j with all-ones off-diagonal
    blocks.
    """
    block = np.zeros((i + j, i + j), dtype=np.int64)
    block[:i, i:] = 1
    block[i:, :i] = 1
    return block


def schur_block_charpoly(
    i: int, j: int, samples: Sequence[int] = (1, 2, 3, -5)
) -> IntPoly:
    """(-1)^(i+j) λ^(i+j-2) (λ^2 - ij), the characteristic polynomial of
    C_{i,j}, checked against the Schur reduction of C_{i,j} - λI at nonzero
    sample points λ.
    """
    if i < 1 or j < 1:
        raise InvalidInputError(f"Block sizes must be positive, got {i} & {j}.")
    sign = -1 if (i + j) % 2 else 1
    closed_form = poly_mul(IntPoly.monomial(i + j - 2, sign), IntPoly((-i * j, 0, 1)))
    for lam in samples:
        if lam == 0:
            continue
        shifted = bipartite_block(i, j) - lam * np.eye(i + j, dtype=np.int64)
        lhs, _ = schur_det_reduce(
            shifted[:i, :i], shifted[:i, i:], shifted[i:, :i], shifted[i:, i:]
        )
        if lhs != closed_form(lam):
            raise RuntimeError(
                f"C_{{{i},{j}}} at λ = {lam}: {lhs} != {closed_form(lam)}."
            )
    return closed_form
