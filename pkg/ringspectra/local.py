"""Locality, the Jacobson radical & its powers, and the (g, x) digit
coordinates of local rings of maximal nilpotency.
"""

import dataclasses
import functools
from typing import Optional

import numpy as np
from sympy import factorint

from .common import ElementId, HypothesisError, NotLocalError
from .ring import FiniteRing


def _nonunits_closed(ring: FiniteRing) -> bool:
    nonunits = np.flatnonzero(~ring.unit_mask)
    sums = ring.add_table[nonunits[:, None], nonunits[None, :]]
    return not np.any(ring.unit_mask[sums])


def is_local(ring: FiniteRing) -> bool:
    """Is the ring local, i.e., are its non-units closed under addition."""
    return _nonunits_closed(ring)


def jacobson_radical(ring: FiniteRing) -> frozenset[ElementId]:
    """Jacobson radical of a local ring, its set of non-units."""
    if not _nonunits_closed(ring):
        raise NotLocalError(
            f"{ring.name or 'The ring'} is not local, its non-units aren't "
            "closed under addition."
        )
    return frozenset(ring.nonunits)


def additive_closure(ring: FiniteRing, generators: np.ndarray) -> np.ndarray:
    """Boolean mask of the additive subgroup generated by the given elements."""
    mask = np.zeros(ring.order, dtype=bool)
    mask[0] = True
    for s in np.unique(generators):
        if mask[s]:
            continue
        # multiples of s
        multiples = [0]
        x = int(s)
        while x != 0:
            multiples.append(x)
            x = int(ring.add_table[x, s])
        members = np.flatnonzero(mask)
        sums = ring.add_table[members[:, None], np.array(multiples)[None, :]]
        mask[sums.ravel()] = True
    return mask


def radical_powers(ring: FiniteRing) -> list[frozenset[ElementId]]:
    """The chain J ⊇ J^2 ⊇ ... ⊇ J^m = {0} of a local ring, ending with the
    first power that is zero. J^(k+1) is the additive closure of the products
    of J^k & J.
    """
    return [frozenset(int(a) for a in np.flatnonzero(m)) for m in _power_masks(ring)]


def _power_masks(ring: FiniteRing) -> list[np.ndarray]:
    jacobson_radical(ring)
    radical = ~ring.unit_mask
    masks = [radical.copy()]
    members = np.flatnonzero(radical)
    while np.count_nonzero(masks[-1]) > 1:
        current = np.flatnonzero(masks[-1])
        products = ring.mul_table[current[:, None], members[None, :]]
        masks.append(additive_closure(ring, products.ravel()))
    return masks


@dataclasses.dataclass(frozen=True)
class LocalProfile:
    """Numerical invariants of a local ring, |R| = q^n & q = p^r.

    Parameters
    ----------
    nil_index
        Smallest m with J^m = 0.
    stratum_sizes
        |J^i \\ J^(i+1)| for i = 0..nil_index, J^0 = R.
    depth
        depth[a] is the k with a in J^k \\ J^(k+1). Units have depth 0 and the
        zero has depth nil_index.
    """

    p: int
    r: int
    q: int
    n: int
    nil_index: int
    stratum_sizes: tuple[int, ...]
    depth: np.ndarray = dataclasses.field(repr=False, compare=False)

    @property
    def is_maximal(self) -> bool:
        """Does the radical have the maximal nilpotency index n."""
        return self.nil_index == self.n

    @property
    def radical_size(self) -> int:
        return self.q ** (self.n - 1)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "r": self.r,
            "q": self.q,
            "n": self.n,
            "nil_index": self.nil_index,
            "stratum_sizes": list(self.stratum_sizes),
        }


def _integer_log(value: int, base: int) -> Optional[int]:
    exponent, x = 0, 1
    while x < value:
        x *= base
        exponent += 1
    return exponent if x == value else None


@functools.lru_cache(maxsize=4)
def local_profile(ring: FiniteRing) -> LocalProfile:
    """Compute the LocalProfile of a local ring."""
    masks = _power_masks(ring)
    radical_size = int(np.count_nonzero(masks[0]))
    q = ring.order // radical_size
    n = _integer_log(ring.order, q)
    factors = factorint(q)
    if n is None or len(factors) != 1:
        raise RuntimeError(
            f"{ring.name}: order {ring.order} isn't a power of q = {q} = p^r."
        )
    ((p, r),) = factors.items()

    # masks[k - 1] is J^k, the last one {0}
    nil_index = len(masks)
    depth = np.zeros(ring.order, dtype=np.int64)
    for k, mask in enumerate(masks, start=1):
        depth[mask] = k
    depth.flags.writeable = False
    stratum_sizes = tuple(
        int(np.count_nonzero(depth == k)) for k in range(nil_index + 1)
    )
    return LocalProfile(
        p=int(p),
        r=int(r),
        q=q,
        n=n,
        nil_index=nil_index,
        stratum_sizes=stratum_sizes,
        depth=depth,
    )


def stratum_of(
    ring: FiniteRing, profile: LocalProfile, a: ElementId
) -> Optional[int]:
    """The k with a in J^k \\ J^(k+1), None for units. The zero maps to
    nil_index.
    """
    k = int(profile.depth[ring.check_index(a)])
    return None if k == 0 else k


def stratum(profile: LocalProfile, k: int) -> np.ndarray:
    """Element ids of J^k \\ J^(k+1), J^0 = R, ascending."""
    return np.flatnonzero(profile.depth == k)


def unit_squares(ring: FiniteRing) -> frozenset[ElementId]:
    """{s^2 : s a unit}."""
    return frozenset(int(a) for a in np.unique(ring.squares[ring.unit_mask]))


def squares_in(ring: FiniteRing, elements: np.ndarray) -> frozenset[ElementId]:
    """Elements among the given ones that are squares in the ring."""
    is_square = np.zeros(ring.order, dtype=bool)
    is_square[ring.squares] = True
    return frozenset(int(a) for a in elements if is_square[a])


def square_zero_radical(ring: FiniteRing) -> frozenset[ElementId]:
    """{j in J : j^2 = 0}."""
    radical = np.flatnonzero(~ring.unit_mask)
    return frozenset(int(j) for j in radical[ring.squares[radical] == 0])


@dataclasses.dataclass(frozen=True)
class StructureBasis:
    """Generators g & x of a local ring of maximal nilpotency. Every element is
    uniquely sum(digit_i * x^i) for i < n with digits from digit_set.

    Parameters
    ----------
    g
        Unit of multiplicative order q - 1 whose powers are distinct modulo J.
    x
        Element of J \\ J^2 with x^(n-1) != 0. The zero for fields.
    digit_set
        0, g, g^2, ..., g^(q-1) = 1.
    """

    g: ElementId
    x: ElementId
    digit_set: tuple[ElementId, ...]


def _residue_order(ring: FiniteRing, radical: np.ndarray, g: int, bound: int) -> int:
    """Smallest m <= bound with g^m - 1 in J, bound + 1 if there's none."""
    minus_one = ring.negate(1)
    x = g
    for m in range(1, bound + 1):
        if radical[ring.add_table[x, minus_one]]:
            return m
        x = int(ring.mul_table[x, g])
    return bound + 1


def find_structure_basis(
    ring: FiniteRing, profile: Optional[LocalProfile] = None
) -> StructureBasis:
    """Choose g & x deterministically, the smallest valid index each time.

    g = g1^(p^t), where g1 is the smallest unit whose residue generates
    (R/J)* and p^t (q - 1) is the multiplicative order of g1.
    """
    if profile is None:
        profile = local_profile(ring)
    if not profile.is_maximal:
        raise HypothesisError(
            f"{ring.name}: the structure basis needs J^(n-1) != 0, but the "
            f"nilpotency index is {profile.nil_index} < n = {profile.n}."
        )
    q, n = profile.q, profile.n
    radical = ~ring.unit_mask

    g1 = next(
        u
        for u in ring.units
        if _residue_order(ring, radical, u, q - 1) == q - 1
    )
    p_power = ring.multiplicative_order(g1) // (q - 1)
    g = ring.power(g1, p_power)
    if ring.multiplicative_order(g) != q - 1:
        raise RuntimeError(f"{ring.name}: g = {ring.label(g)} has the wrong order.")

    if n == 1:
        x = 0
    else:
        x = next(
            int(a)
            for a in stratum(profile, 1)
            if ring.power(int(a), n - 1) != 0
        )
    digit_set = (0, *(ring.power(g, k) for k in range(1, q)))
    return StructureBasis(g=g, x=x, digit_set=digit_set)


def coordinates(
    ring: FiniteRing,
    basis: StructureBasis,
    a: ElementId,
    profile: Optional[LocalProfile] = None,
) -> list[ElementId]:
    """Digits d_0..d_(n-1) from the digit set with sum(d_i * x^i) = a, found
    stratum by stratum.
    """
    if profile is None:
        profile = local_profile(ring)
    rest = ring.check_index(a)
    digits = []
    x_power = 1
    for i in range(profile.n):
        for d in basis.digit_set:
            candidate = ring.subtract(rest, ring.mul(d, x_power))
            if profile.depth[candidate] > i:
                digits.append(d)
                rest = candidate
                break
        else:
            raise RuntimeError(
                f"{ring.name}: no digit expansion of '{ring.label(a)}' at "
                f"position {i}."
            )
        x_power = ring.mul(x_power, basis.x)
    if rest != 0:
        raise RuntimeError(
            f"{ring.name}: digit expansion of '{ring.label(a)}' leaves "
            f"'{ring.label(rest)}'."
        )
    return digits


def expand_digits(
    ring: FiniteRing, basis: StructureBasis, digits: list[ElementId]
) -> ElementId:
    """sum(d_i * x^i)."""
    result, x_power = 0, 1
    for d in digits:
        result = ring.add(result, ring.mul(d, x_power))
        x_power = ring.mul(x_power, basis.x)
    return result
