"""Closed-form characteristic polynomials of product matrices of finite local
rings, and the classification of (R, u) into the case each formula covers.

The predictors take numeric parameters only, q = |R/J|, |R| = q^n, the
stratum k of u and whether u is a square. classify_case is the only place
where a ring is turned into those parameters.
"""

import dataclasses
import enum
from typing import Optional

import numpy as np

from .charpoly import LAMBDA, FactoredPoly, IntPoly, charpoly_dense, expand, linear
from .common import ElementId, HypothesisError
from .local import LocalProfile, local_profile, stratum_of
from .ring import FiniteRing


class CaseTag(enum.Enum):
    """Branches of the closed forms."""

    U0_MAXNIL = "U0_MAXNIL"
    UNIT_ODD_SQ = "UNIT_ODD_SQ"
    UNIT_ODD_NONSQ = "UNIT_ODD_NONSQ"
    UNIT_EVEN_CHAR2 = "UNIT_EVEN_CHAR2"
    UNIT_EVEN_CHAR2N_SQ = "UNIT_EVEN_CHAR2N_SQ"
    UNIT_EVEN_CHAR2N_NONSQ = "UNIT_EVEN_CHAR2N_NONSQ"
    STRATUM_K_ODD = "STRATUM_K_ODD"
    STRATUM_K_EVEN_SQ = "STRATUM_K_EVEN_SQ"
    STRATUM_K_EVEN_NONSQ = "STRATUM_K_EVEN_NONSQ"
    J2_ZERO_U0 = "J2_ZERO_U0"
    J2_ZERO_UNIT_SQ_EVEN = "J2_ZERO_UNIT_SQ_EVEN"
    J2_ZERO_UNIT_NONSQ_EVEN = "J2_ZERO_UNIT_NONSQ_EVEN"
    J2_ZERO_UNIT_SQ_ODD = "J2_ZERO_UNIT_SQ_ODD"
    J2_ZERO_UNIT_NONSQ_ODD = "J2_ZERO_UNIT_NONSQ_ODD"
    J2_ZERO_RADICAL = "J2_ZERO_RADICAL"
    UNSUPPORTED = "UNSUPPORTED"


J2_ZERO_TAGS = frozenset(tag for tag in CaseTag if tag.name.startswith("J2_ZERO"))


class Theorem(enum.Enum):
    """Families of closed forms, in the order classify_case tries them."""

    J2_ZERO = "j2zero"
    UNIT_ODD = "unit_odd"
    ZERO_MAXNIL = "zero_maxnil"
    UNIT_EVEN = "unit_even"
    STRATUM = "stratum"


@dataclasses.dataclass(frozen=True)
class Case:
    """Classification of (R, u).

    Parameters
    ----------
    tag
        Branch, UNSUPPORTED if no formula covers (R, u).
    q, n
        |R/J| & the exponent with |R| = q^n.
    k
        Stratum of u, None for units.
    is_square
        Is u = s^2 for some s in R.
    characteristic
        Characteristic of R.
    reason
        The violated hypothesis of an UNSUPPORTED case.
    note
        Remark about a supported case that deserves scrutiny.
    """

    tag: CaseTag
    q: int
    n: int
    k: Optional[int]
    is_square: bool
    characteristic: int
    reason: str = ""
    note: str = ""

    @property
    def supported(self) -> bool:
        return self.tag != CaseTag.UNSUPPORTED

    def __str__(self) -> str:
        if self.supported:
            return self.tag.value
        return f"UNSUPPORTED({self.reason})"

    def to_json(self) -> dict:
        document: dict = {"tag": self.tag.value}
        if self.reason:
            document["reason"] = self.reason
        if self.note:
            document["note"] = self.note
        return document


def _unsupported(case: Case, reason: str) -> Case:
    return dataclasses.replace(case, tag=CaseTag.UNSUPPORTED, reason=reason)


def _classify_j2_zero(case: Case, profile: LocalProfile, u: ElementId) -> Case:
    if profile.nil_index > 2:
        return _unsupported(case, f"J^2 != 0, nilpotency index {profile.nil_index}")
    if u == 0:
        tag = CaseTag.J2_ZERO_U0
    elif case.k is not None:
        tag = CaseTag.J2_ZERO_RADICAL
    # a unit square is the square of a unit, squares of non-units lie in J
    elif case.q % 2 == 0:
        tag = (
            CaseTag.J2_ZERO_UNIT_SQ_EVEN
            if case.is_square
            else CaseTag.J2_ZERO_UNIT_NONSQ_EVEN
        )
    else:
        tag = (
            CaseTag.J2_ZERO_UNIT_SQ_ODD
            if case.is_square
            else CaseTag.J2_ZERO_UNIT_NONSQ_ODD
        )
    return dataclasses.replace(case, tag=tag)


def _classify_unit_odd(case: Case, profile: LocalProfile, u: ElementId) -> Case:
    if case.k is not None:
        return _unsupported(case, "u is not a unit")
    if case.q % 2 == 0:
        return _unsupported(case, f"q = {case.q} is even")
    tag = CaseTag.UNIT_ODD_SQ if case.is_square else CaseTag.UNIT_ODD_NONSQ
    return dataclasses.replace(case, tag=tag)


def _classify_zero_maxnil(case: Case, profile: LocalProfile, u: ElementId) -> Case:
    if u != 0:
        return _unsupported(case, "u != 0")
    if not profile.is_maximal:
        return _unsupported(case, _not_maximal(profile))
    return dataclasses.replace(case, tag=CaseTag.U0_MAXNIL)


def _classify_unit_even(case: Case, profile: LocalProfile, u: ElementId) -> Case:
    if case.k is not None:
        return _unsupported(case, "u is not a unit")
    if case.q % 2:
        return _unsupported(case, f"q = {case.q} is odd")
    if not profile.is_maximal:
        return _unsupported(case, _not_maximal(profile))
    if case.characteristic == 2:
        return dataclasses.replace(case, tag=CaseTag.UNIT_EVEN_CHAR2)
    if case.characteristic == 2**case.n and case.n >= 3:
        tag = (
            CaseTag.UNIT_EVEN_CHAR2N_SQ
            if case.is_square
            else CaseTag.UNIT_EVEN_CHAR2N_NONSQ
        )
        return dataclasses.replace(case, tag=tag)
    return _unsupported(
        case,
        f"characteristic {case.characteristic} is neither 2 nor 2^n with n >= 3",
    )


def _classify_stratum(case: Case, profile: LocalProfile, u: ElementId) -> Case:
    if u == 0 or case.k is None:
        return _unsupported(case, "u is not a nonzero element of J")
    if not profile.is_maximal:
        return _unsupported(case, _not_maximal(profile))
    k = case.k
    if k % 2:
        note = "" if case.q % 2 else f"odd k = {k} with even q = {case.q}"
        return dataclasses.replace(case, tag=CaseTag.STRATUM_K_ODD, note=note)
    if case.q % 2 == 0:
        return _unsupported(case, f"k = {k} is even and q = {case.q} is even")
    tag = CaseTag.STRATUM_K_EVEN_SQ if case.is_square else CaseTag.STRATUM_K_EVEN_NONSQ
    return dataclasses.replace(case, tag=tag)


def _not_maximal(profile: LocalProfile) -> str:
    return f"nilpotency index {profile.nil_index} < n = {profile.n}"


_CLASSIFIERS = {
    Theorem.J2_ZERO: _classify_j2_zero,
    Theorem.UNIT_ODD: _classify_unit_odd,
    Theorem.ZERO_MAXNIL: _classify_zero_maxnil,
    Theorem.UNIT_EVEN: _classify_unit_even,
    Theorem.STRATUM: _classify_stratum,
}


def classify_case(
    ring: FiniteRing,
    u: ElementId,
    profile: Optional[LocalProfile] = None,
    family: Optional[Theorem] = None,
) -> Case:
    """Decide which closed form describes A_u(R).

    Without a family, rings with J^2 = 0 go to the J^2 = 0 theorem, units of
    rings with odd q to the odd unit theorem, and the rest to the theorems on
    maximal nilpotency. With a family, only that theorem is considered and
    its violated hypothesis is reported as UNSUPPORTED.
    """
    u = ring.check_index(u)
    if profile is None:
        profile = local_profile(ring)
    case = Case(
        tag=CaseTag.UNSUPPORTED,
        q=profile.q,
        n=profile.n,
        k=stratum_of(ring, profile, u),
        is_square=bool(ring.square_roots(u)),
        characteristic=ring.characteristic,
    )
    if family is not None:
        return _CLASSIFIERS[family](case, profile, u)

    if profile.nil_index <= 2:
        return _classify_j2_zero(case, profile, u)
    if case.k is None and case.q % 2:
        return _classify_unit_odd(case, profile, u)
    if not profile.is_maximal:
        return _unsupported(
            case,
            f"nilpotency index {profile.nil_index} is neither 2 nor n = {profile.n}",
        )
    if u == 0:
        return _classify_zero_maxnil(case, profile, u)
    if case.k is None:
        return _classify_unit_even(case, profile, u)
    return _classify_stratum(case, profile, u)


def _unit_form(
    scalar: int, q: int, n: int, plus_one: int, minus_one: int
) -> FactoredPoly:
    """scalar λ^(q^(n-1)) (λ-1)^plus_one (λ+1)^minus_one."""
    return FactoredPoly(
        scalar,
        ((LAMBDA, q ** (n - 1)), (linear(-1), plus_one), (linear(1), minus_one)),
    )


def predict_unit_odd(q: int, n: int, is_square: bool) -> FactoredPoly:
    """A_u(R) for a unit u of a local ring with odd q."""
    if q % 2 == 0:
        raise HypothesisError(f"The odd unit formula needs an odd q, got {q}.")
    if n < 1:
        raise HypothesisError(f"n must be at least 1, got {n}.")
    units = q**n - q ** (n - 1)
    if is_square:
        return _unit_form(-1, q, n, (units + 2) // 2, (units - 2) // 2)
    return _unit_form(-1, q, n, units // 2, units // 2)


def antidiagonal_det(values: list[list[int]]) -> IntPoly:
    """det(M - λE) for an integer matrix M and the exchange matrix E.

    E^2 = I, so M - λE = E(EM - λI) and the determinant is det(E) times the
    characteristic polynomial of M with its rows reversed.
    """
    size = len(values)
    reversed_rows = np.array(values[::-1], dtype=object).reshape(size, size)
    poly = charpoly_dense(reversed_rows)
    if (size * (size - 1) // 2) % 2:
        poly = IntPoly(tuple(-c for c in poly.coeffs))
    return poly


def _split_lambda(sign: int, power: int, poly: IntPoly) -> FactoredPoly:
    """sign * λ^power * poly with the factors λ of poly moved into the power."""
    low = next(i for i, c in enumerate(poly.coeffs) if c)
    rest = IntPoly(poly.coeffs[low:])
    if rest.degree == 0:
        return FactoredPoly(sign * rest.leading, ((LAMBDA, power + low),))
    return FactoredPoly(sign, ((LAMBDA, power + low), (rest, 1)))


def alpha(q: int, i: int) -> int:
    """|J^(n-i) \\ J^(n-i+1)| = q^i - q^(i-1) in a ring of maximal nilpotency."""
    return q**i - q ** (i - 1)


def _zero_maxnil_factored(q: int, n: int) -> FactoredPoly:
    # row 0 is all ones, row i holds alpha_i from column i on, minus λ on the
    # antidiagonal
    size = n + 1
    values = [
        [1 if i == 0 else (alpha(q, i) if j >= i else 0) for j in range(size)]
        for i in range(size)
    ]
    sign = -1 if (q - (n + 1) * (n + 2) // 2) % 2 else 1
    return _split_lambda(sign, q**n - (n + 1), antidiagonal_det(values))


def predict_zero_maxnil(q: int, n: int) -> IntPoly:
    """A_0(R) for a local ring of maximal nilpotency, |R| = q^n."""
    if n < 1:
        raise HypothesisError(f"n must be at least 1, got {n}.")
    return expand(_zero_maxnil_factored(q, n))


def predict_adjacency_loops(q: int, n: int) -> IntPoly:
    """Adjacency matrix of the zero-divisor graph with loops on J \\ {0} of a
    local ring of maximal nilpotency, normalized to the leading coefficient
    (-1)^(q^(n-1) - 1).
    """
    if n < 2:
        raise HypothesisError(f"The zero-divisor graph is empty for n = {n} < 2.")
    size = n - 1
    values = [
        [alpha(q, i + 1) if j >= i else 0 for j in range(size)] for i in range(size)
    ]
    poly = IntPoly.monomial(q ** (n - 1) - n) * antidiagonal_det(values)
    wanted = -1 if (q ** (n - 1) - 1) % 2 else 1
    if poly.leading * wanted < 0:
        poly = IntPoly(tuple(-c for c in poly.coeffs))
    return poly


def predict_unit_even_maxnil(
    q: int, n: int, characteristic: int, is_square: bool
) -> FactoredPoly:
    """A_u(R) for a unit u of a local ring of maximal nilpotency with even q
    and characteristic 2 or 2^n, n >= 3.

    In characteristic 2 a unit square has q^floor(n/2) square roots, the
    others pair up with their partners s^-1 u.
    """
    if q % 2:
        raise HypothesisError(f"The even unit formula needs an even q, got {q}.")
    units = q**n - q ** (n - 1)
    if characteristic == 2:
        roots = q ** (n // 2) if is_square else 0
    elif characteristic == 2**n and n >= 3:
        roots = 4 if is_square else 0
    else:
        raise HypothesisError(
            f"Characteristic {characteristic} is neither 2 nor 2^n with n >= 3."
        )
    return _unit_form(1, q, n, (units + roots) // 2, (units - roots) // 2)


def predict_stratum(
    q: int, n: int, k: int, is_square: bool, q_parity: Optional[str] = None
) -> FactoredPoly:
    """A_u(R) for u in J^k \\ J^(k+1) of a local ring of maximal nilpotency.

    q_parity, "odd" or "even", is implied by q. If given it must agree.
    """
    if q_parity is not None and q_parity != ("odd" if q % 2 else "even"):
        raise HypothesisError(f"q = {q} does not have parity '{q_parity}'.")
    if not 0 <= k <= n - 1:
        raise HypothesisError(f"Stratum k = {k} is not in [0, {n - 1}].")
    base = q ** (n - k - 1) * (q - 1)
    zero_power = q ** (n - k - 1) * (q ** (k + 1) - (k + 1) * (q - 1))
    quadratic = IntPoly((-(q**k), 0, 1))
    if k % 2:
        sign = -1 if q % 2 else 1
        return FactoredPoly(
            sign, ((LAMBDA, zero_power), (quadratic, base * (k + 1) // 2))
        )
    if q % 2 == 0:
        raise HypothesisError(f"Even k = {k} needs an odd q, got {q}.")
    pairs = base // 2 * (k + 1)
    if is_square:
        return FactoredPoly(
            -1,
            (
                (LAMBDA, zero_power),
                (quadratic, pairs - 1),
                (linear(-(q ** (k // 2))), 2),
            ),
        )
    return FactoredPoly(-1, ((LAMBDA, zero_power), (quadratic, pairs)))


def predict_j2zero(q: int, n: int, tag: CaseTag) -> FactoredPoly:
    """A_u(R) for a local ring with J^2 = 0, one branch per tag."""
    if tag not in J2_ZERO_TAGS:
        raise HypothesisError(f"{tag.value} is not a branch of the J^2 = 0 formula.")
    units = q**n - q ** (n - 1)
    radical = q ** (n - 1)
    sign = -1 if q % 2 else 1
    if tag == CaseTag.J2_ZERO_U0:
        cubic = IntPoly((radical * (q - 1) * (radical - 1), -units, -radical, 1))
        # fields have a zero constant term, q^n - 3 may be -1
        return _split_lambda(sign, q**n - 3, cubic)
    if tag == CaseTag.J2_ZERO_UNIT_SQ_EVEN:
        return _unit_form(1, q, n, q**n // 2, (q**n - 2 * radical) // 2)
    if tag == CaseTag.J2_ZERO_UNIT_NONSQ_EVEN:
        return _unit_form(1, q, n, units // 2, units // 2)
    if tag == CaseTag.J2_ZERO_UNIT_SQ_ODD:
        return predict_unit_odd(q, n, True)
    if tag == CaseTag.J2_ZERO_UNIT_NONSQ_ODD:
        return predict_unit_odd(q, n, False)
    return FactoredPoly(
        sign,
        ((LAMBDA, q**n - 2 * q + 2), (IntPoly((-radical, 0, 1)), q - 1)),
    )


def predict(case: Case) -> Optional[FactoredPoly]:
    """The closed form of a classified case, None if it's UNSUPPORTED."""
    tag = case.tag
    if tag == CaseTag.UNSUPPORTED:
        return None
    if tag in J2_ZERO_TAGS:
        return predict_j2zero(case.q, case.n, tag)
    if tag in (CaseTag.UNIT_ODD_SQ, CaseTag.UNIT_ODD_NONSQ):
        return predict_unit_odd(case.q, case.n, case.is_square)
    if tag == CaseTag.U0_MAXNIL:
        return _zero_maxnil_factored(case.q, case.n)
    if tag in (
        CaseTag.UNIT_EVEN_CHAR2,
        CaseTag.UNIT_EVEN_CHAR2N_SQ,
        CaseTag.UNIT_EVEN_CHAR2N_NONSQ,
    ):
        return predict_unit_even_maxnil(
            case.q, case.n, case.characteristic, case.is_square
        )
    assert case.k is not None
    return predict_stratum(case.q, case.n, case.k, case.is_square)
