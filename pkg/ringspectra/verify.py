"""Comparison of the closed forms against exact characteristic polynomials,
for single instances & for sweeps over ring families.
"""

import concurrent.futures
import csv
import dataclasses
import functools
import io
import json
import pathlib
import time
from typing import Callable, Optional

import numpy as np

from .builders import RingSpec, build_ring, parse_ring_spec
from .charpoly import (
    FactoredPoly,
    IntPoly,
    charpoly_dense,
    charpoly_lowrank,
    schur_block_charpoly,
)
from .common import (
    DEFAULT_DENSE_LIMIT,
    ElementId,
    InvalidInputError,
    PlanError,
    default_sweep_limit,
    resolve_cap,
)
from .local import (
    LocalProfile,
    is_local,
    local_profile,
    square_zero_radical,
    squares_in,
    stratum,
    unit_squares,
)
from .matrix import (
    OrderingTag,
    ProductMatrix,
    block_census,
    build_product_matrix,
    from_hex_json,
    make_ordering,
    nonzero_row_count,
    proof_ordering_tag,
    rank,
    row_sums,
    to_hex_json,
    trace,
)
from .ring import FiniteRing
from .theorems import (
    Case,
    CaseTag,
    Theorem,
    classify_case,
    predict,
    predict_adjacency_loops,
)

SCHEMA_VERSION = 1
METHODS = ("dense", "lowrank", "both")
ORDERINGS = ("natural", "proof")
U_SELECTORS = ("all", "units", "strata", "zero", "representatives")
FAMILIES = ("zn", "polyquot_monomial", "nullext", "field", "specs")
CSV_COLUMNS = ("ring", "u", "case", "match", "degree", "nonzero_rank")
SCHUR_SAMPLE_LIMIT = 64


@dataclasses.dataclass(frozen=True)
class VerifyOptions:
    """How the oracle polynomial is computed.

    Parameters
    ----------
    method
        "lowrank", "dense", or "both" for the low-rank polynomial with a dense
        cross-check up to dense_limit elements.
    dense_limit
        Largest ring order for the dense cross-check of "both".
    ordering
        "natural" or "proof", the ordering that exposes the block structure.
    family
        Restrict the classification to one theorem.
    """

    method: str = "both"
    dense_limit: int = DEFAULT_DENSE_LIMIT
    ordering: str = "natural"
    family: Optional[Theorem] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInputError(f"Invalid method: '{self.method}'.")
        if self.ordering not in ORDERINGS:
            raise InvalidInputError(f"Invalid ordering: '{self.ordering}'.")
        if self.dense_limit < 0:
            raise InvalidInputError(
                f"Dense limit must be non-negative, got {self.dense_limit}."
            )


@dataclasses.dataclass(frozen=True)
class CountCheck:
    """An enumerated count compared to its closed form."""

    expected: int
    actual: int

    @property
    def passed(self) -> bool:
        return self.expected == self.actual

    def to_json(self) -> dict:
        return {"expected": self.expected, "actual": self.actual, "pass": self.passed}


@dataclasses.dataclass
class VerifyReport:
    """Outcome of comparing the closed form of A_u(R) to its exact
    characteristic polynomial. match is None if no closed form applies.
    """

    ring_spec: str
    u_label: str
    size: int
    case: Case
    predicted: Optional[FactoredPoly]
    oracle: IntPoly
    match: Optional[bool]
    rank: int
    ordering: str
    aux_checks: dict[str, bool] = dataclasses.field(default_factory=dict)
    counts: dict[str, CountCheck] = dataclasses.field(default_factory=dict)
    timings: dict[str, float] = dataclasses.field(default_factory=dict)
    dump: Optional[dict] = None

    @property
    def ok(self) -> bool:
        """No mismatch & no failed auxiliary check."""
        return self.match is not False and self.aux_ok

    @property
    def aux_ok(self) -> bool:
        return all(self.aux_checks.values())

    def dumped_matrix(self) -> Optional[np.ndarray]:
        """The matrix dumped for a failed report, unpacked."""
        return None if self.dump is None else from_hex_json(self.dump)

    def to_json(self, timings: bool = False) -> dict:
        document: dict = {
            "schema": SCHEMA_VERSION,
            "ring": self.ring_spec,
            "u": self.u_label,
            "size": self.size,
            "case": self.case.to_json(),
            "predicted": None,
            "oracle": self.oracle.to_json(),
            "match": self.match,
            "rank": self.rank,
            "ordering": self.ordering,
            "aux_checks": dict(sorted(self.aux_checks.items())),
            "counts": {
                name: check.to_json() for name, check in sorted(self.counts.items())
            },
        }
        if self.predicted is not None:
            document["predicted"] = {
                **self.predicted.to_json(),
                "human": str(self.predicted),
                **self.predicted.expand().to_json(),
            }
        if timings:
            document["wall_time_ms"] = {
                phase: round(ms, 3) for phase, ms in self.timings.items()
            }
        if self.dump is not None:
            document["matrix"] = self.dump
        return document

    def csv_row(self) -> list[str]:
        match = "n/a" if self.match is None else str(self.match).lower()
        return [
            self.ring_spec,
            self.u_label,
            str(self.case),
            match,
            str(self.oracle.degree),
            str(self.rank),
        ]


class _Stopwatch:
    """Wall time per phase in milliseconds."""

    def __init__(self):
        self.timings: dict[str, float] = {}
        self._start = time.perf_counter()

    def lap(self, phase: str):
        now = time.perf_counter()
        self.timings[phase] = (now - self._start) * 1000
        self._start = now


def _common_root_count(roots: list[int]) -> int:
    """Number of square roots shared by all unit squares, -1 if it varies."""
    return roots[0] if len(set(roots)) == 1 else -1


def count_checks(ring: FiniteRing, profile: LocalProfile) -> dict[str, CountCheck]:
    """Enumerated square counts of a local ring against their closed forms,
    for the rings the closed forms cover.
    """
    q, n = profile.q, profile.n
    units = q**n - q ** (n - 1)
    squares = unit_squares(ring)
    roots = _common_root_count(
        [len(ring.square_roots(s)) for s in sorted(squares)]
    )

    fibre: Optional[int] = None
    if q % 2:
        fibre = 2
    elif profile.nil_index <= 2:
        fibre = q ** (n - 1)
    elif profile.is_maximal and ring.characteristic == 2:
        fibre = q ** (n // 2)
    elif profile.is_maximal and ring.characteristic == 2**n and n >= 3:
        fibre = 4
    checks: dict[str, CountCheck] = {}
    if fibre is not None:
        checks["unit_squares"] = CountCheck(units // fibre, len(squares))
        checks["unit_square_roots"] = CountCheck(fibre, roots)
    if profile.is_maximal and profile.nil_index > 2 and ring.characteristic == 2:
        checks["square_zero_radical"] = CountCheck(
            q ** (n // 2), len(square_zero_radical(ring))
        )

    if profile.is_maximal:
        for k in range(1, n):
            if k % 2:
                expected = 0
            elif q % 2:
                expected = q ** (n - k - 1) * (q - 1) // 2
            else:
                continue
            actual = len(squares_in(ring, stratum(profile, k)))
            checks[f"stratum_{k}_squares"] = CountCheck(expected, actual)
    return checks


def classify(
    ring: FiniteRing, u: ElementId, family: Optional[Theorem] = None
) -> Case:
    """classify_case for any ring, UNSUPPORTED with reason "not local" for
    rings that aren't local.
    """
    if is_local(ring):
        return classify_case(ring, u, family=family)
    return Case(
        tag=CaseTag.UNSUPPORTED,
        q=0,
        n=0,
        k=None,
        is_square=bool(ring.square_roots(u)),
        characteristic=ring.characteristic,
        reason="not local",
    )


def _zero_multiplicity(poly: IntPoly) -> int:
    return next(i for i, c in enumerate(poly.coeffs) if c != 0)


def _row_sums_check(
    ring: FiniteRing, matrix: ProductMatrix, u: ElementId
) -> Optional[bool]:
    """Unit u: unit rows sum to 1, other rows to 0. u = 0: unit rows sum to
    1, the row of 0 to |R|.
    """
    sums = row_sums(matrix)
    unit = ring.unit_mask[list(matrix.ordering)]
    if ring.is_unit(u):
        return bool(np.all(np.where(unit, 1, 0) == sums))
    if u == 0:
        zero_position = matrix.ordering.index(0)
        return bool(
            np.all(np.asarray(sums)[unit] == 1) and sums[zero_position] == ring.order
        )
    return None


def _adjacency_loops_check(
    ring: FiniteRing, profile: LocalProfile, matrix: ProductMatrix
) -> bool:
    """Compare the zero-divisor graph with loops, the principal submatrix of
    A_0(R) on J \\ {0}, to its closed form.
    """
    dense = matrix.dense()
    ordering = np.array(matrix.ordering)
    keep = np.flatnonzero(~ring.unit_mask[ordering] & (ordering != 0))
    sub = dense[np.ix_(keep, keep)]
    return charpoly_lowrank(sub) == predict_adjacency_loops(profile.q, profile.n)


def _nonzero_rows_check(
    ring: FiniteRing, profile: LocalProfile, matrix: ProductMatrix, u: ElementId
) -> Optional[bool]:
    """Unit u: exactly the q^n - q^(n-1) unit rows have a one. u = 0: every row
    has a one.
    """
    if ring.is_unit(u):
        expected = profile.q**profile.n - profile.q ** (profile.n - 1)
    elif u == 0:
        expected = ring.order
    else:
        return None
    return nonzero_row_count(matrix) == expected


@functools.lru_cache(maxsize=256)
def _biclique_charpoly(i: int, j: int) -> IntPoly:
    # the Schur reduction is validated at sample points for small blocks only
    samples = (1, 2, 3, -5) if i + j <= SCHUR_SAMPLE_LIMIT else ()
    return schur_block_charpoly(i, j, samples)


def _census_check(matrix: ProductMatrix, oracle: IntPoly) -> Optional[bool]:
    """Compare the oracle to the product of the closed forms of the connected
    blocks: -λ per zero vertex, (-1)^k λ^(k-1) (λ - k) per full(k) block and
    the Schur form of C_{i,j} per biclique(i,j). None if a block has no
    closed form.
    """
    expected = IntPoly((1,))
    for shape, count in block_census(matrix).items():
        kind, _, args = shape.partition("(")
        sizes = [int(s) for s in args.rstrip(")").split(",")] if args else []
        if kind == "zero":
            block = IntPoly((0, -1))
        elif kind == "full":
            k = sizes[0]
            block = IntPoly.monomial(k - 1, (-1) ** k) * IntPoly((-k, 1))
        elif kind == "biclique":
            block = _biclique_charpoly(sizes[0], sizes[1])
        else:
            return None
        expected = expected * block**count
    return expected == oracle


def verify_instance(
    ring: FiniteRing,
    u: ElementId,
    options: Optional[VerifyOptions] = None,
) -> VerifyReport:
    """Classify (R, u), predict its characteristic polynomial, compute it
    exactly and run the auxiliary checks. UNSUPPORTED cases are recorded,
    never raised.
    """
    if options is None:
        options = VerifyOptions()
    u = ring.check_index(u)
    watch = _Stopwatch()

    tag = proof_ordering_tag(ring, u) if options.ordering == "proof" else None
    plan = make_ordering(ring, u, tag or OrderingTag.NATURAL)
    matrix = build_product_matrix(ring, u, plan)
    watch.lap("build")

    profile = local_profile(ring) if is_local(ring) else None
    case = classify(ring, u, options.family)
    predicted = predict(case)
    watch.lap("classify")

    aux: dict[str, bool] = {}
    if options.method == "dense":
        oracle = charpoly_dense(matrix)
        watch.lap("dense")
    else:
        oracle = charpoly_lowrank(matrix)
        watch.lap("lowrank")
        if options.method == "both" and ring.order <= options.dense_limit:
            aux["dense_agrees"] = charpoly_dense(matrix) == oracle
            watch.lap("dense")

    n = ring.order
    match = None if predicted is None else predicted.expand() == oracle
    matrix_rank = rank(matrix)
    matrix_trace = trace(matrix)
    aux["degree"] = oracle.degree == n and oracle.leading == (-1) ** n
    aux["trace"] = matrix_trace == len(ring.square_roots(u)) and (
        oracle.coeffs[n - 1] == (-1) ** (n - 1) * matrix_trace
    )
    aux["rank"] = matrix_rank == n - _zero_multiplicity(oracle)
    row_check = _row_sums_check(ring, matrix, u)
    if row_check is not None:
        aux["row_sums"] = row_check
    census_check = _census_check(matrix, oracle)
    if census_check is not None:
        aux["block_census"] = census_check

    counts: dict[str, CountCheck] = {}
    if profile is not None:
        counts = count_checks(ring, profile)
        aux["counts"] = all(check.passed for check in counts.values())
        rows_check = _nonzero_rows_check(ring, profile, matrix, u)
        if rows_check is not None:
            aux["nonzero_rows"] = rows_check
        if u == 0 and profile.is_maximal:
            aux["zero_rank"] = matrix_rank == profile.n + 1
            if profile.n >= 2:
                aux["adjacency_loops"] = _adjacency_loops_check(ring, profile, matrix)
    watch.lap("aux")

    report = VerifyReport(
        ring_spec=ring.name,
        u_label=ring.label(u),
        size=n,
        case=case,
        predicted=predicted,
        oracle=oracle,
        match=match,
        rank=matrix_rank,
        ordering=plan.tag.value,
        aux_checks=aux,
        counts=counts,
        timings=watch.timings,
    )
    if not report.ok:
        report.dump = to_hex_json(matrix)
    return report


def select_elements(ring: FiniteRing, selector: str) -> list[ElementId]:
    """Elements u of a sweep instance.

    "strata" selects the nonzero non-units, "representatives" the smallest u
    of every case.
    """
    if selector == "all":
        return list(range(ring.order))
    if selector == "units":
        return list(ring.units)
    if selector == "zero":
        return [0]
    if selector == "strata":
        return [a for a in ring.nonunits if a != 0]
    if selector == "representatives":
        if not is_local(ring):
            return [0, 1]
        profile = local_profile(ring)
        seen: dict[str, ElementId] = {}
        for u in range(ring.order):
            seen.setdefault(str(classify_case(ring, u, profile)), u)
        return sorted(seen.values())
    raise InvalidInputError(f"Invalid u selector: '{selector}'.")


@dataclasses.dataclass(frozen=True)
class SweepPlan:
    """Declarative sweep over ring families, the JSON document

    {"families": [...], "max_order": 125, "u_selector": "all"}

    with families such as {"family": "zn", "primes": [2, 3], "exponents":
    [1, 2, 3]}, {"family": "polyquot_monomial", "bases": ["zn:2"],
    "degrees": [2, 3]}, {"family": "nullext", "fields": [[2, 1]], "lengths":
    [2, 3]}, {"family": "field", "fields": [[2, 2]]} and {"family": "specs",
    "specs": ["zn:6"]}.
    """

    families: tuple[dict, ...]
    max_order: Optional[int] = None
    u_selector: str = "all"

    def __post_init__(self):
        if self.u_selector not in U_SELECTORS:
            raise PlanError(f"Invalid u_selector: '{self.u_selector}'.")
        if self.max_order is not None and self.max_order < 2:
            raise PlanError(f"max_order must be at least 2, got {self.max_order}.")
        for family in self.families:
            if family.get("family") not in FAMILIES:
                raise PlanError(f"Invalid sweep family: '{family.get('family')}'.")

    @classmethod
    def from_json(cls, document: dict) -> "SweepPlan":
        if not isinstance(document, dict) or "families" not in document:
            raise PlanError("A sweep plan must be an object with 'families'.")
        unknown = set(document) - {"families", "max_order", "u_selector"}
        if unknown:
            raise PlanError(f"Unknown sweep plan keys: {sorted(unknown)}.")
        return cls(
            families=tuple(document["families"]),
            max_order=document.get("max_order"),
            u_selector=document.get("u_selector", "all"),
        )

    def to_json(self) -> dict:
        return {
            "families": list(self.families),
            "max_order": self.max_order,
            "u_selector": self.u_selector,
        }

    def ring_specs(self) -> list[RingSpec]:
        """Expanded ring specs in plan order, without duplicates and rings
        larger than max_order.
        """
        specs: list[RingSpec] = []
        try:
            for family in self.families:
                specs.extend(_expand_family(family))
        except (KeyError, TypeError) as e:
            raise PlanError(f"Malformed sweep family: {e}.") from e
        expanded: dict[str, RingSpec] = {}
        for spec in specs:
            if self.max_order is None or spec.order() <= self.max_order:
                expanded.setdefault(str(spec), spec)
        return list(expanded.values())


def _expand_family(family: dict) -> list[RingSpec]:
    kind = family["family"]
    if kind == "zn":
        return [
            RingSpec("zn", modulus=p**e)
            for p in family["primes"]
            for e in family["exponents"]
        ]
    if kind == "polyquot_monomial":
        return [
            RingSpec(
                "polyquot", base=parse_ring_spec(base), poly=(0,) * d + (1,)
            )
            for base in family["bases"]
            for d in family["degrees"]
        ]
    if kind == "nullext":
        return [
            RingSpec("nullext", p=p, r=r, n=length)
            for p, r in family["fields"]
            for length in family["lengths"]
        ]
    if kind == "field":
        return [RingSpec("field", p=p, r=r) for p, r in family["fields"]]
    return [parse_ring_spec(text) for text in family["specs"]]


def load_sweep_plan(path: pathlib.Path) -> SweepPlan:
    try:
        document = json.loads(path.read_text())
    except OSError as e:
        raise PlanError(f"Could not read sweep plan '{path}': {e}.") from e
    except json.JSONDecodeError as e:
        raise PlanError(f"Sweep plan '{path}' is not valid JSON: {e}.") from e
    return SweepPlan.from_json(document)


@dataclasses.dataclass
class SweepResult:
    reports: list[VerifyReport]
    summary: dict

    @property
    def ok(self) -> bool:
        return all(report.ok for report in self.reports)


def summarize(reports: list[VerifyReport]) -> dict:
    """Counts of total, match, mismatch & unsupported instances per case tag
    and overall.
    """

    def empty() -> dict[str, int]:
        return {"total": 0, "match": 0, "mismatch": 0, "unsupported": 0}

    per_case: dict[str, dict[str, int]] = {}
    overall = empty()
    aux_failures = 0
    for report in reports:
        outcome = (
            "unsupported"
            if report.match is None
            else ("match" if report.match else "mismatch")
        )
        for counts in (per_case.setdefault(report.case.tag.value, empty()), overall):
            counts["total"] += 1
            counts[outcome] += 1
        aux_failures += not all(report.aux_checks.values())
    return {
        "cases": dict(sorted(per_case.items())),
        **overall,
        "aux_failures": aux_failures,
    }


def _verify_ring(
    spec: str, selector: str, options: VerifyOptions, cap: int
) -> list[VerifyReport]:
    ring = build_ring(spec, cap)
    try:
        return [
            verify_instance(ring, u, options) for u in select_elements(ring, selector)
        ]
    finally:
        # cached profiles keep the tables of the ring alive
        local_profile.cache_clear()


def run_sweep(
    plan: SweepPlan,
    cap: Optional[int] = None,
    limit: Optional[int] = None,
    threads: int = 1,
    options: Optional[VerifyOptions] = None,
    progress: Optional[Callable[[str], None]] = None,
) -> SweepResult:
    """Verify every instance of a sweep plan. Rings run concurrently in
    worker processes if threads > 1, reports keep the plan order.

    Parameters
    ----------
    cap
        Largest allowed ring order.
    limit
        Upper bound for the summed orders of the rings of the plan.
    progress
        Called with a line of progress after every ring.
    """
    cap = resolve_cap(cap)
    limit = default_sweep_limit() if limit is None else limit
    options = options or VerifyOptions()
    specs = plan.ring_specs()
    for spec in specs:
        if spec.order() > cap:
            raise PlanError(
                f"Ring '{spec}' of order {spec.order()} exceeds the cap {cap}."
            )
    total_order = sum(spec.order() for spec in specs)
    if total_order > limit:
        raise PlanError(
            f"Sweep covers rings of summed order {total_order}, more than the "
            f"limit {limit}."
        )

    texts = [str(spec) for spec in specs]
    args = ([plan.u_selector] * len(texts), [options] * len(texts), [cap] * len(texts))
    reports: list[VerifyReport] = []
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as executor:
            results = executor.map(_verify_ring, texts, *args)
            for text, ring_reports in zip(texts, results):
                _progress(progress, text, ring_reports)
                reports.extend(ring_reports)
    else:
        for text in texts:
            ring_reports = _verify_ring(text, plan.u_selector, options, cap)
            _progress(progress, text, ring_reports)
            reports.extend(ring_reports)
    return SweepResult(reports=reports, summary=summarize(reports))


def _progress(
    progress: Optional[Callable[[str], None]], spec: str, reports: list[VerifyReport]
):
    if progress is None:
        return
    failures = sum(not report.ok for report in reports)
    progress(f"{spec}: {len(reports)} instances, {failures} failures.")


def reports_to_csv(reports: list[VerifyReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        writer.writerow(report.csv_row())
    return buffer.getvalue()


def sweep_to_json(plan: SweepPlan, result: SweepResult, timings: bool = False) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "plan": plan.to_json(),
        "reports": [report.to_json(timings) for report in result.reports],
        "summary": result.summary,
    }
