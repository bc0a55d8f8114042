"""Product matrices A_u(R), a_ij = 1 iff x_i * x_j = u, under element
orderings that expose their block structure.
"""

import collections
import dataclasses
import enum
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .common import ElementId, HypothesisError, Ordering, PlanError
from .local import is_local, local_profile, stratum
from .ring import FiniteRing


class OrderingTag(enum.Enum):
    """Element orderings of product matrices."""

    NATURAL = "natural"
    # units, J \ J^2, ..., J^(n-1) \ {0}, 0
    ZERO_BLOCK = "zero_block"
    # J, square roots of u, pairs (s, s^-1 u)
    UNIT_PAIRING = "unit_pairing"
    # J^(k+1), then classes of J^l \ J^(l+1) followed by their partners
    STRATUM_PAIRING = "stratum_pairing"
    # units by coset of J, their partners, the rest
    J2_BLOCK = "j2_block"


@dataclasses.dataclass(frozen=True)
class OrderingPlan:
    """Element ordering for the product matrix of u.

    Parameters
    ----------
    tag
        Layout of the ordering.
    u
        Element the plan was made for.
    permutation
        permutation[i] is the element at matrix position i.
    """

    tag: OrderingTag
    u: ElementId
    permutation: Ordering

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise PlanError(f"Ordering '{self.tag.value}' is not a permutation.")


@dataclasses.dataclass(frozen=True, eq=False)
class ProductMatrix:
    """Symmetric 0/1 matrix with bit-packed rows.

    Parameters
    ----------
    u
        Element whose product matrix this is.
    ordering
        ordering[i] is the element at matrix position i.
    packed
        Rows packed with np.packbits, the most significant bit of the first
        byte being column 0.
    tag
        Layout of the ordering.
    ring_name
        Name of the ring.
    """

    u: ElementId
    ordering: Ordering
    packed: np.ndarray = dataclasses.field(repr=False)
    tag: OrderingTag = OrderingTag.NATURAL
    ring_name: str = ""

    @property
    def size(self) -> int:
        return len(self.ordering)

    def dense(self) -> np.ndarray:
        """Unpacked matrix of dtype uint8."""
        return np.unpackbits(self.packed, axis=1, count=self.size)

    def entry(self, i: int, j: int) -> int:
        return int(self.packed[i, j // 8] >> (7 - j % 8) & 1)


def _check_local(ring: FiniteRing, tag: OrderingTag):
    if not is_local(ring):
        raise HypothesisError(
            f"Ordering '{tag.value}' needs a local ring, {ring.name} is not local."
        )


def _zero_block(ring: FiniteRing, u: ElementId) -> list[int]:
    _check_local(ring, OrderingTag.ZERO_BLOCK)
    if u != 0:
        raise HypothesisError("Ordering 'zero_block' is for u = 0 only.")
    profile = local_profile(ring)
    return [int(a) for k in range(profile.nil_index + 1) for a in stratum(profile, k)]


def _unit_pairing(ring: FiniteRing, u: ElementId) -> list[int]:
    if not ring.is_unit(u):
        raise HypothesisError(
            f"Ordering 'unit_pairing' needs a unit, '{ring.label(u)}' isn't one."
        )
    roots = sorted(ring.square_roots(u))
    order = list(ring.nonunits) + roots
    placed = set(order)
    for s in ring.units:
        if s in placed:
            continue
        partner = ring.mul(ring.inverse(s), u)
        order += [s, partner]
        placed.update((s, partner))
    return order


def _partner_sets(ring: FiniteRing, u: ElementId) -> np.ndarray:
    """Row s is the mask of the t with s * t = u."""
    return ring.mul_table == u


def _stratum_pairing(ring: FiniteRing, u: ElementId) -> list[int]:
    _check_local(ring, OrderingTag.STRATUM_PAIRING)
    profile = local_profile(ring)
    if not profile.is_maximal:
        raise HypothesisError(
            f"Ordering 'stratum_pairing' needs maximal nilpotency, {ring.name} has "
            f"nilpotency index {profile.nil_index} < n = {profile.n}."
        )
    k = int(profile.depth[u])
    if u == 0 or k == 0:
        raise HypothesisError(
            "Ordering 'stratum_pairing' needs 0 != u in J, "
            f"got '{ring.label(u)}'."
        )
    partners = _partner_sets(ring, u)
    order = [int(a) for a in np.flatnonzero(profile.depth > k)]
    placed = np.zeros(ring.order, dtype=bool)
    placed[order] = True
    for l in range(k // 2 + 1):
        members = stratum(profile, l)
        for s in members:
            if placed[s]:
                continue
            same = members[np.all(partners[members] == partners[s], axis=1)]
            block = [int(a) for a in same if not placed[a]]
            partner_block = [int(t) for t in np.flatnonzero(partners[s])]
            if set(partner_block) != set(block):
                block += partner_block
            if np.any(placed[block]):
                raise HypothesisError(
                    f"Product classes of u = '{ring.label(u)}' overlap in "
                    f"{ring.name}."
                )
            order += block
            placed[block] = True
    return order


def _j2_block(ring: FiniteRing, u: ElementId) -> list[int]:
    _check_local(ring, OrderingTag.J2_BLOCK)
    profile = local_profile(ring)
    if profile.nil_index > 2:
        raise HypothesisError(
            f"Ordering 'j2_block' needs J^2 = 0, {ring.name} has nilpotency "
            f"index {profile.nil_index}."
        )
    if u == 0 or ring.is_unit(u):
        raise HypothesisError(
            f"Ordering 'j2_block' needs 0 != u in J, got '{ring.label(u)}'."
        )
    # units grouped by their unique partner s^-1 u, i.e., by coset of J
    cosets: dict[int, list[int]] = {}
    for s in ring.units:
        cosets.setdefault(ring.mul(ring.inverse(s), u), []).append(s)
    order = [s for coset in cosets.values() for s in coset]
    order += list(cosets)
    placed = set(order)
    return order + [a for a in range(ring.order) if a not in placed]


_LAYOUTS = {
    OrderingTag.ZERO_BLOCK: _zero_block,
    OrderingTag.UNIT_PAIRING: _unit_pairing,
    OrderingTag.STRATUM_PAIRING: _stratum_pairing,
    OrderingTag.J2_BLOCK: _j2_block,
}


def make_ordering(ring: FiniteRing, u: ElementId, tag: OrderingTag) -> OrderingPlan:
    """Ordering that realizes a block layout of A_u(R). Elements ascend by
    index within each group.
    """
    u = ring.check_index(u)
    if tag == OrderingTag.NATURAL:
        return OrderingPlan(tag, u, tuple(range(ring.order)))
    return OrderingPlan(tag, u, tuple(_LAYOUTS[tag](ring, u)))


def proof_ordering_tag(ring: FiniteRing, u: ElementId) -> OrderingTag:
    """The layout that exposes the block structure of A_u(R), natural if no
    layout applies.
    """
    u = ring.check_index(u)
    if ring.is_unit(u):
        return OrderingTag.UNIT_PAIRING
    if not is_local(ring):
        return OrderingTag.NATURAL
    if u == 0:
        return OrderingTag.ZERO_BLOCK
    profile = local_profile(ring)
    if profile.nil_index <= 2:
        return OrderingTag.J2_BLOCK
    if profile.is_maximal:
        return OrderingTag.STRATUM_PAIRING
    return OrderingTag.NATURAL


def build_product_matrix(
    ring: FiniteRing, u: ElementId, plan: Optional[OrderingPlan] = None
) -> ProductMatrix:
    """A_u(R) with rows & columns in the order of the plan, natural if None."""
    u = ring.check_index(u)
    if plan is None:
        plan = make_ordering(ring, u, OrderingTag.NATURAL)
    if len(plan.permutation) != ring.order:
        raise PlanError(
            f"Ordering of {len(plan.permutation)} elements doesn't fit "
            f"{ring.name} of order {ring.order}."
        )
    if plan.tag != OrderingTag.NATURAL and plan.u != u:
        raise PlanError(
            f"Ordering '{plan.tag.value}' was made for u = '{ring.label(plan.u)}', "
            f"not for '{ring.label(u)}'."
        )
    perm = np.array(plan.permutation, dtype=np.int64)
    bits = ring.mul_table[perm[:, None], perm[None, :]] == u
    return ProductMatrix(
        u=u,
        ordering=plan.permutation,
        packed=np.packbits(bits, axis=1),
        tag=plan.tag,
        ring_name=ring.name,
    )


def trace(matrix: ProductMatrix) -> int:
    """Number of ones on the diagonal, the number of square roots of u."""
    return sum(matrix.entry(i, i) for i in range(matrix.size))


def row_sums(matrix: ProductMatrix) -> list[int]:
    """Ones per row, in matrix order."""
    return [int(c) for c in matrix.dense().sum(axis=1, dtype=np.int64)]


def rank(matrix: ProductMatrix) -> int:
    """Rank over the rationals."""
    return _domain_matrix(matrix.dense()).rank()


def nonzero_row_count(matrix: ProductMatrix) -> int:
    return int(np.count_nonzero(np.any(matrix.packed, axis=1)))


def _domain_matrix(dense: np.ndarray) -> DomainMatrix:
    """Sparse DomainMatrix over QQ of a 0/1 matrix."""
    rows: dict[int, dict[int, object]] = {}
    for i, j in zip(*np.nonzero(dense)):
        rows.setdefault(int(i), {})[int(j)] = QQ(int(dense[i, j]))
    return DomainMatrix(rows, dense.shape, QQ)


def _component_shape(block: np.ndarray) -> str:
    m = block.shape[0]
    if m == 1:
        return "full(1)" if block[0, 0] else "zero"
    if np.all(block):
        return f"full({m})"
    side = block[0].astype(bool)
    other = ~side
    if (
        not np.any(block[np.ix_(side, side)])
        and not np.any(block[np.ix_(other, other)])
        and np.all(block[np.ix_(side, other)])
    ):
        i, j = sorted((int(side.sum()), int(other.sum())), reverse=True)
        return f"biclique({i},{j})"
    return f"other({m})"


def block_census(matrix: ProductMatrix) -> dict[str, int]:
    """Shapes of the connected components of A_u(R) as a graph, with counts.

    A component is "zero" (an isolated vertex without a loop), "full(k)" (a
    k x k all-ones block), "biclique(i,j)" (a block C_{i,j}, i >= j) or
    "other(m)".
    """
    dense = matrix.dense()
    count, labels = connected_components(csr_matrix(dense), directed=False)
    census: collections.Counter = collections.Counter()
    for component in range(count):
        members = np.flatnonzero(labels == component)
        census[_component_shape(dense[np.ix_(members, members)])] += 1
    return dict(sorted(census.items()))


def to_grid_text(matrix: ProductMatrix) -> str:
    """Rows of 0 & 1 characters, one line per row."""
    return "\n".join("".join(map(str, row)) for row in matrix.dense())


def to_hex_json(matrix: ProductMatrix) -> dict:
    """{"n": N, "rows": [hex strings]}, row bytes as produced by np.packbits."""
    return {"n": matrix.size, "rows": [row.tobytes().hex() for row in matrix.packed]}


def from_hex_json(document: dict) -> np.ndarray:
    """Inverse of to_hex_json, returns the unpacked matrix."""
    n = int(document["n"])
    packed = np.array(
        [list(bytes.fromhex(row)) for row in document["rows"]], dtype=np.uint8
    ).reshape(n, -1)
    return np.unpackbits(packed, axis=1, count=n)
