import json

import numpy as np
import pytest

from ringspectra import verify
from ringspectra.builders import build_ring, build_zn
from ringspectra.charpoly import LAMBDA, FactoredPoly, IntPoly, charpoly_lowrank
from ringspectra.common import InvalidInputError, PlanError
from ringspectra.local import local_profile
from ringspectra.matrix import build_product_matrix, rank
from ringspectra.theorems import CaseTag, Theorem, predict_zero_maxnil
from ringspectra.verify import (
    CountCheck,
    SweepPlan,
    VerifyOptions,
    classify,
    count_checks,
    load_sweep_plan,
    reports_to_csv,
    run_sweep,
    select_elements,
    summarize,
    sweep_to_json,
    verify_instance,
)

SMALL_PLAN = SweepPlan(
    families=({"family": "zn", "primes": [2, 3], "exponents": [1, 2]},)
)

# local rings of maximal nilpotency up to order 729
MAXIMAL_SPECS = (
    [f"zn:{2**e}" for e in range(1, 10)]
    + [f"zn:{3**e}" for e in range(1, 7)]
    + [f"zn:{5**e}" for e in range(1, 5)]
    + [f"zn:{7**e}" for e in range(1, 4)]
    + [f"polyquot:zn:2;f=x^{d}" for d in range(2, 10)]
    + [f"polyquot:zn:3;f=x^{d}" for d in range(2, 7)]
    + ["polyquot:field:2,2;f=y^2", "polyquot:field:3,2;f=y^2"]
)


def test_verify_options():
    with pytest.raises(InvalidInputError, match="Invalid method: 'fast'"):
        VerifyOptions(method="fast")
    with pytest.raises(InvalidInputError, match="Invalid ordering"):
        VerifyOptions(ordering="random")
    with pytest.raises(InvalidInputError, match="non-negative"):
        VerifyOptions(dense_limit=-1)


def test_verify_stratum_instance():
    report = verify_instance(build_zn(27), 9)
    assert report.match is True
    assert report.ok
    assert report.case.tag == CaseTag.STRATUM_K_EVEN_SQ
    assert report.u_label == "9"
    assert report.size == 27
    assert report.ordering == "natural"
    assert report.rank == 6
    assert set(report.aux_checks) == {
        "dense_agrees",
        "degree",
        "trace",
        "rank",
        "block_census",
        "counts",
    }
    assert report.dump is None
    assert str(report.predicted) == "-λ^21(λ^2-9)^2(λ-3)^2"

    document = report.to_json()
    assert document["schema"] == 1
    assert document["ring"] == "zn:27"
    assert document["match"] is True
    assert document["predicted"]["human"] == "-λ^21(λ^2-9)^2(λ-3)^2"
    assert document["predicted"]["coeffs"] == document["oracle"]["coeffs"]
    assert "wall_time_ms" not in document
    assert "matrix" not in document
    assert set(report.to_json(timings=True)["wall_time_ms"]) == {
        "build",
        "classify",
        "lowrank",
        "dense",
        "aux",
    }
    # the document is plain JSON
    json.dumps(document)


def test_verify_zero_with_proof_ordering():
    report = verify_instance(build_zn(9), 0, VerifyOptions(ordering="proof"))
    assert report.ordering == "zero_block"
    assert report.case.tag == CaseTag.J2_ZERO_U0
    assert report.match
    for check in ["row_sums", "zero_rank", "adjacency_loops", "nonzero_rows"]:
        assert report.aux_checks[check]
    assert report.rank == 3


def test_verify_unit_instance():
    report = verify_instance(build_zn(8), 3, VerifyOptions(method="dense"))
    assert report.match
    assert report.aux_checks["row_sums"]
    assert "dense_agrees" not in report.aux_checks
    assert "lowrank" not in report.timings


def test_verify_unsupported_instances():
    report = verify_instance(build_zn(16), 4)
    assert report.match is None
    assert report.ok
    assert report.predicted is None
    assert report.csv_row()[2:4] == [
        "UNSUPPORTED(k = 2 is even and q = 2 is even)",
        "n/a",
    ]
    assert report.to_json()["predicted"] is None

    report = verify_instance(build_zn(6), 1)
    assert str(report.case) == "UNSUPPORTED(not local)"
    assert report.counts == {}
    assert "counts" not in report.aux_checks
    assert report.ok

    options = VerifyOptions(family=Theorem.UNIT_EVEN)
    report = verify_instance(build_zn(4), 1, options)
    assert report.case.tag == CaseTag.UNSUPPORTED
    assert report.match is None


def test_mismatch_dumps_the_matrix(monkeypatch):
    monkeypatch.setattr(verify, "predict", lambda case: FactoredPoly(1, ((LAMBDA, 4),)))
    report = verify_instance(build_zn(4), 1)
    assert report.match is False
    assert not report.ok
    assert report.dump == {"n": 4, "rows": ["00", "40", "00", "10"]}
    assert report.to_json()["matrix"] == report.dump
    natural = build_product_matrix(build_zn(4), 1).dense()
    assert np.array_equal(report.dumped_matrix(), natural)
    assert verify_instance(build_zn(4), 3).dumped_matrix() is None
    assert report.csv_row()[3] == "false"



def test_block_census_check():
    report = verify_instance(build_zn(9), 3)
    assert report.aux_checks["block_census"]
    matrix = build_product_matrix(build_zn(9), 3)
    assert verify._census_check(matrix, IntPoly.monomial(9, -1)) is False
    # A_0 of a local ring is a single connected block without a closed form
    matrix = build_product_matrix(build_zn(9), 0)
    assert verify._census_check(matrix, charpoly_lowrank(matrix)) is None


def test_nonzero_rows_check():
    assert verify_instance(build_zn(8), 3).aux_checks["nonzero_rows"]
    assert verify_instance(build_ring("field:2,2"), 0).aux_checks["nonzero_rows"]
    assert "nonzero_rows" not in verify_instance(build_zn(8), 2).aux_checks


def test_classify():
    assert classify(build_zn(27), 0).tag == CaseTag.U0_MAXNIL
    case = classify(build_zn(12), 1)
    assert (case.tag, case.reason, case.q, case.n) == (
        CaseTag.UNSUPPORTED,
        "not local",
        0,
        0,
    )
    assert case.is_square


def test_count_checks():
    ring = build_zn(27)
    checks = count_checks(ring, local_profile(ring))
    assert checks == {
        "unit_squares": CountCheck(9, 9),
        "unit_square_roots": CountCheck(2, 2),
        "stratum_1_squares": CountCheck(0, 0),
        "stratum_2_squares": CountCheck(1, 1),
    }

    ring = build_ring("polyquot:zn:2;f=x^3")
    checks = count_checks(ring, local_profile(ring))
    assert checks["unit_squares"] == CountCheck(2, 2)
    assert checks["unit_square_roots"] == CountCheck(2, 2)
    assert checks["square_zero_radical"] == CountCheck(2, 2)
    assert checks["stratum_1_squares"] == CountCheck(0, 0)
    assert "stratum_2_squares" not in checks

    for spec in ["zn:9", "zn:16", "field:2,3", "nullext:3,1;n=3", "zn:25"]:
        ring = build_ring(spec)
        for name, check in count_checks(ring, local_profile(ring)).items():
            assert check.passed, f"{spec}: {name}"

    assert CountCheck(1, 2).to_json() == {"expected": 1, "actual": 2, "pass": False}


def test_select_elements():
    ring = build_zn(9)
    assert select_elements(ring, "all") == list(range(9))
    assert select_elements(ring, "units") == [1, 2, 4, 5, 7, 8]
    assert select_elements(ring, "strata") == [3, 6]
    assert select_elements(ring, "zero") == [0]
    assert select_elements(ring, "representatives") == [0, 1, 2, 3]
    assert select_elements(build_zn(6), "representatives") == [0, 1]
    with pytest.raises(InvalidInputError, match="Invalid u selector"):
        select_elements(ring, "some")


def test_sweep_plan_validation():
    with pytest.raises(PlanError, match="Invalid u_selector"):
        SweepPlan(families=(), u_selector="odd")
    with pytest.raises(PlanError, match="max_order must be at least 2"):
        SweepPlan(families=(), max_order=1)
    with pytest.raises(PlanError, match="Invalid sweep family: 'matrix'"):
        SweepPlan(families=({"family": "matrix"},))
    with pytest.raises(PlanError, match="Unknown sweep plan keys: \\['cap'\\]"):
        SweepPlan.from_json({"families": [], "cap": 3})
    with pytest.raises(PlanError, match="must be an object"):
        SweepPlan.from_json([])
    with pytest.raises(PlanError, match="Malformed sweep family"):
        SweepPlan(families=({"family": "zn", "primes": [2]},)).ring_specs()


def test_sweep_plan_ring_specs():
    plan = SweepPlan.from_json(
        {
            "families": [
                {"family": "zn", "primes": [2, 3], "exponents": [1, 2, 3]},
                {"family": "specs", "specs": ["zn:4", "zn:6"]},
                {"family": "polyquot_monomial", "bases": ["zn:2"], "degrees": [3]},
                {"family": "nullext", "fields": [[2, 1]], "lengths": [2]},
                {"family": "field", "fields": [[2, 2]]},
            ],
            "max_order": 10,
        }
    )
    assert [str(spec) for spec in plan.ring_specs()] == [
        "zn:2",
        "zn:4",
        "zn:8",
        "zn:3",
        "zn:9",
        "zn:6",
        "polyquot:zn:2;f=x^3",
        "nullext:2,1;n=2",
        "field:2,2",
    ]
    assert SweepPlan.from_json(plan.to_json()) == plan


def test_load_sweep_plan(tmp_path):
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(SMALL_PLAN.to_json()))
    assert load_sweep_plan(path) == SMALL_PLAN

    path.write_text("{")
    with pytest.raises(PlanError, match="not valid JSON"):
        load_sweep_plan(path)
    with pytest.raises(PlanError, match="Could not read"):
        load_sweep_plan(tmp_path / "missing.json")


def test_run_sweep():
    lines = []
    result = run_sweep(SMALL_PLAN, progress=lines.append)
    assert result.ok
    assert len(result.reports) == 2 + 4 + 3 + 9
    summary = result.summary
    assert summary["total"] == 18
    assert summary["match"] == 18
    assert summary["mismatch"] == summary["unsupported"] == 0
    assert summary["aux_failures"] == 0
    assert summary["cases"]["J2_ZERO_U0"]["total"] == 4
    assert lines[0] == "zn:2: 2 instances, 0 failures."
    assert len(lines) == 4

    csv_text = reports_to_csv(result.reports)
    assert csv_text.splitlines()[0] == "ring,u,case,match,degree,nonzero_rank"
    assert csv_text.splitlines()[1] == "zn:2,0,J2_ZERO_U0,true,2,2"

    document = sweep_to_json(SMALL_PLAN, result)
    assert document["summary"] == summary
    assert len(document["reports"]) == 18
    # the profiles of swept rings are not kept
    assert local_profile.cache_info().currsize == 0


def test_run_sweep_in_worker_processes():
    serial = run_sweep(SMALL_PLAN)
    parallel = run_sweep(SMALL_PLAN, threads=2)
    assert reports_to_csv(parallel.reports) == reports_to_csv(serial.reports)
    assert parallel.summary == serial.summary


def test_run_sweep_limits():
    plan = SweepPlan(families=({"family": "specs", "specs": ["zn:27", "zn:9"]},))
    with pytest.raises(PlanError, match="'zn:27' of order 27 exceeds the cap 20"):
        run_sweep(plan, cap=20)
    with pytest.raises(PlanError, match="summed order 36, more than the limit 30"):
        run_sweep(plan, limit=30)


def test_summarize():
    reports = [verify_instance(build_zn(16), u) for u in [0, 4]]
    summary = summarize(reports)
    assert summary["total"] == 2
    assert summary["cases"] == {
        "U0_MAXNIL": {"total": 1, "match": 1, "mismatch": 0, "unsupported": 0},
        "UNSUPPORTED": {"total": 1, "match": 0, "mismatch": 0, "unsupported": 1},
    }


@pytest.mark.slow
@pytest.mark.parametrize(
    "spec",
    [
        "zn:25",
        "zn:27",
        "zn:32",
        "zn:49",
        "polyquot:zn:3;f=x^2",
        "polyquot:zn:2;f=x^5",
        "polyquot:field:3,2;f=y^2",
    ],
)
def test_every_element(spec):
    ring = build_ring(spec)
    for u in range(ring.order):
        report = verify_instance(ring, u, VerifyOptions(method="lowrank"))
        assert report.ok, f"{spec}, u = {ring.label(u)}"


@pytest.mark.slow
@pytest.mark.parametrize("spec", MAXIMAL_SPECS)
def test_zero_of_maximal_nilpotency(spec):
    ring = build_ring(spec)
    profile = local_profile(ring)
    assert profile.is_maximal
    matrix = build_product_matrix(ring, 0)
    assert rank(matrix) == profile.n + 1
    assert predict_zero_maxnil(profile.q, profile.n) == charpoly_lowrank(matrix)


@pytest.mark.slow
def test_sweep_of_every_element_up_to_order_128():
    plan = SweepPlan(
        families=(
            {
                "family": "zn",
                "primes": [2, 3, 5, 7, 11],
                "exponents": [1, 2, 3, 4, 5, 6, 7],
            },
        ),
        max_order=128,
        u_selector="all",
    )
    summary = run_sweep(plan).summary
    assert summary["total"] == sum(
        p**e for p in [2, 3, 5, 7, 11] for e in range(1, 8) if p**e <= 128
    )
    assert summary["mismatch"] == 0
    assert summary["aux_failures"] == 0
