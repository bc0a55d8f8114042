import pytest

from ringspectra.builders import build_ring, build_zn
from ringspectra.charpoly import charpoly_dense, charpoly_lowrank
from ringspectra.common import HypothesisError
from ringspectra.matrix import build_product_matrix
from ringspectra.theorems import (
    CaseTag,
    Theorem,
    alpha,
    antidiagonal_det,
    classify_case,
    predict,
    predict_adjacency_loops,
    predict_j2zero,
    predict_stratum,
    predict_unit_even_maxnil,
    predict_unit_odd,
    predict_zero_maxnil,
)

# local rings covering J^2 = 0, maximal nilpotency, odd & even q
LOCAL_SPECS = [
    "zn:2",
    "zn:4",
    "zn:8",
    "zn:9",
    "zn:16",
    "zn:25",
    "zn:27",
    "field:2,2",
    "field:3,2",
    "nullext:2,1;n=3",
    "nullext:3,1;n=2",
    "polyquot:zn:2;f=x^3",
    "polyquot:zn:2;f=x^4",
    "polyquot:zn:3;f=x^2",
]


@pytest.mark.parametrize(
    "spec, u, tag",
    [
        ("zn:9", 0, CaseTag.J2_ZERO_U0),
        ("zn:9", 1, CaseTag.J2_ZERO_UNIT_SQ_ODD),
        ("zn:9", 2, CaseTag.J2_ZERO_UNIT_NONSQ_ODD),
        ("zn:9", 3, CaseTag.J2_ZERO_RADICAL),
        ("zn:4", 1, CaseTag.J2_ZERO_UNIT_SQ_EVEN),
        ("zn:4", 3, CaseTag.J2_ZERO_UNIT_NONSQ_EVEN),
        ("zn:27", 0, CaseTag.U0_MAXNIL),
        ("zn:27", 1, CaseTag.UNIT_ODD_SQ),
        ("zn:27", 2, CaseTag.UNIT_ODD_NONSQ),
        ("zn:27", 3, CaseTag.STRATUM_K_ODD),
        ("zn:27", 9, CaseTag.STRATUM_K_EVEN_SQ),
        ("zn:27", 18, CaseTag.STRATUM_K_EVEN_NONSQ),
        ("zn:8", 1, CaseTag.UNIT_EVEN_CHAR2N_SQ),
        ("zn:8", 3, CaseTag.UNIT_EVEN_CHAR2N_NONSQ),
        ("zn:8", 2, CaseTag.STRATUM_K_ODD),
        ("zn:8", 0, CaseTag.U0_MAXNIL),
        ("polyquot:zn:2;f=x^3", 1, CaseTag.UNIT_EVEN_CHAR2),
        ("zn:16", 4, CaseTag.UNSUPPORTED),
    ],
)
def test_classify_case(spec, u, tag):
    assert classify_case(build_ring(spec), u).tag == tag


def test_case_details():
    case = classify_case(build_zn(27), 9)
    assert (case.q, case.n, case.k, case.is_square) == (3, 3, 2, True)
    assert case.characteristic == 27
    assert case.supported
    assert str(case) == "STRATUM_K_EVEN_SQ"
    assert case.to_json() == {"tag": "STRATUM_K_EVEN_SQ"}

    case = classify_case(build_zn(8), 2)
    assert case.note == "odd k = 1 with even q = 2"
    assert case.to_json()["note"] == case.note
    assert classify_case(build_zn(27), 3).note == ""

    case = classify_case(build_zn(16), 4)
    assert not case.supported
    assert case.reason == "k = 2 is even and q = 2 is even"
    assert str(case) == "UNSUPPORTED(k = 2 is even and q = 2 is even)"
    assert predict(case) is None


def test_unsupported_nilpotency():
    ring = build_ring("polyquot:zn:4;f=x^2")
    for u in [0, 1, ring.element_by_label("x")]:
        case = classify_case(ring, u)
        assert case.tag == CaseTag.UNSUPPORTED
        assert case.reason == "nilpotency index 3 is neither 2 nor n = 4"


def test_families():
    ring = build_zn(9)
    case = classify_case(ring, 0, family=Theorem.ZERO_MAXNIL)
    assert case.tag == CaseTag.U0_MAXNIL
    # both theorems cover Z_9 with u = 0
    assert predict(case).expand() == predict(classify_case(ring, 0)).expand()

    case = classify_case(ring, 3, family=Theorem.STRATUM)
    assert case.tag == CaseTag.STRATUM_K_ODD
    assert predict(case).expand() == predict(classify_case(ring, 3)).expand()

    case = classify_case(build_zn(27), 1, family=Theorem.J2_ZERO)
    assert case.reason == "J^2 != 0, nilpotency index 3"
    case = classify_case(build_zn(8), 1, family=Theorem.UNIT_ODD)
    assert case.reason == "q = 2 is even"
    case = classify_case(build_zn(4), 1, family=Theorem.UNIT_EVEN)
    assert case.tag == CaseTag.UNSUPPORTED
    assert "characteristic 4" in case.reason
    case = classify_case(build_zn(27), 1, family=Theorem.STRATUM)
    assert case.reason == "u is not a nonzero element of J"
    case = classify_case(build_zn(27), 3, family=Theorem.ZERO_MAXNIL)
    assert case.reason == "u != 0"


@pytest.mark.parametrize(
    "spec, u, expected",
    [
        ("zn:8", 1, "λ^4(λ-1)^4"),
        ("zn:8", 3, "λ^4(λ-1)^2(λ+1)^2"),
        ("zn:8", 2, "λ^4(λ^2-2)^2"),
        ("zn:27", 9, "-λ^21(λ^2-9)^2(λ-3)^2"),
        ("zn:27", 18, "-λ^21(λ^2-9)^3"),
        ("zn:4", 2, "λ^2(λ^2-2)"),
        ("zn:9", 0, "-λ^6(λ^3-3λ^2-6λ+12)"),
        ("nullext:2,1;n=3", 0, "λ^5(λ^3-4λ^2-4λ+12)"),
        ("polyquot:zn:2;f=x^3", 1, "λ^4(λ-1)^3(λ+1)"),
        ("zn:2", 0, "λ^2-λ-1"),
        ("zn:3", 0, "-λ(λ^2-λ-2)"),
        ("field:2,2", 0, "λ^2(λ^2-λ-3)"),
        ("zn:8", 0, "λ^4(λ^4-2λ^3-8λ^2+4λ+8)"),
    ],
)
def test_predictions(spec, u, expected):
    ring = build_ring(spec)
    predicted = predict(classify_case(ring, u))
    assert str(predicted) == expected
    assert predicted.expand() == charpoly_dense(build_product_matrix(ring, u))


@pytest.mark.parametrize("spec", LOCAL_SPECS)
def test_supported_predictions_match_dense(spec):
    ring = build_ring(spec)
    for u in range(ring.order):
        case = classify_case(ring, u)
        if not case.supported or case.note:
            continue
        oracle = charpoly_dense(build_product_matrix(ring, u))
        assert predict(case).expand() == oracle, f"{spec}, u = {ring.label(u)}"


def test_predictor_hypotheses():
    with pytest.raises(HypothesisError, match="needs an odd q"):
        predict_unit_odd(2, 3, True)
    with pytest.raises(HypothesisError, match="n must be at least 1"):
        predict_zero_maxnil(3, 0)
    with pytest.raises(HypothesisError, match="not in \\[0, 1\\]"):
        predict_stratum(3, 2, 2, False)
    with pytest.raises(HypothesisError, match="Even k = 2 needs an odd q"):
        predict_stratum(2, 3, 2, True)
    with pytest.raises(HypothesisError, match="does not have parity 'even'"):
        predict_stratum(3, 3, 2, True, q_parity="even")
    with pytest.raises(HypothesisError, match="not a branch"):
        predict_j2zero(3, 2, CaseTag.UNIT_ODD_SQ)
    with pytest.raises(HypothesisError, match="neither 2 nor 2\\^n"):
        predict_unit_even_maxnil(2, 2, 4, True)
    with pytest.raises(HypothesisError, match="needs an even q"):
        predict_unit_even_maxnil(3, 2, 9, True)
    with pytest.raises(HypothesisError, match="empty for n = 1"):
        predict_adjacency_loops(3, 1)


def test_unit_odd_forms():
    assert str(predict_unit_odd(3, 2, True)) == "-λ^3(λ-1)^4(λ+1)^2"
    assert str(predict_unit_odd(5, 1, False)) == "-λ(λ-1)^2(λ+1)^2"
    assert str(predict_unit_odd(3, 1, False)) == "-λ(λ-1)(λ+1)"


def test_zero_of_fields():
    # ±λ^(q-2)(λ^2 - λ - (q - 1))
    for spec, q in [("zn:3", 3), ("zn:5", 5), ("field:2,2", 4), ("zn:7", 7)]:
        predicted = predict(classify_case(build_ring(spec), 0)).expand()
        sign = -1 if q % 2 else 1
        assert predicted.coeffs == tuple(
            sign * c for c in (0,) * (q - 2) + (1 - q, -1, 1)
        )


def test_predictors_have_full_degree():
    for q, n in [(2, 3), (3, 3), (4, 2), (5, 2), (2, 5)]:
        assert predict_zero_maxnil(q, n).degree == q**n
        assert predict_stratum(q, n, 1, False).expand().degree == q**n
        assert predict_j2zero(q, n, CaseTag.J2_ZERO_U0).expand().degree == q**n


def test_stratum_parity():
    assert predict_stratum(3, 3, 2, True, q_parity="odd") == predict_stratum(
        3, 3, 2, True
    )
    assert predict_stratum(2, 3, 1, False, q_parity="even") == predict_stratum(
        2, 3, 1, False
    )


def test_antidiagonal_det():
    # det([[1, 2 - λ], [3 - λ, 4]]) = 4 - (2 - λ)(3 - λ)
    assert antidiagonal_det([[1, 2], [3, 4]]).coeffs == (-2, 5, -1)
    assert antidiagonal_det([[5]]).coeffs == (5, -1)


def test_zero_maxnil_at_scale():
    assert predict_zero_maxnil(2, 12).degree == 4096
    oracle = charpoly_lowrank(build_product_matrix(build_zn(128), 0))
    assert predict_zero_maxnil(2, 7) == oracle


def test_alpha():
    assert [alpha(3, i) for i in range(1, 4)] == [2, 6, 18]


def test_adjacency_loops():
    assert predict_adjacency_loops(3, 2).coeffs == (0, -2, 1)
    assert predict_adjacency_loops(2, 2).coeffs == (1, -1)
    assert predict_adjacency_loops(2, 3).coeffs == (0, 2, 1, -1)
