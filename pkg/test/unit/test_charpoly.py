import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import QQ

from ringspectra.builders import build_ring, build_zn
from ringspectra.charpoly import (
    LAMBDA,
    FactoredPoly,
    IntPoly,
    bipartite_block,
    charpoly_dense,
    charpoly_lowrank,
    connected_blocks,
    determinant,
    expand,
    linear,
    schur_block_charpoly,
    schur_det_reduce,
)
from ringspectra.common import (
    InvalidInputError,
    PreconditionError,
    UnsupportedMatrixError,
)
from ringspectra.matrix import build_product_matrix


def test_int_poly():
    poly = IntPoly((0, -1, 2, -1))
    assert str(poly) == "-λ^3+2λ^2-λ"
    assert poly.degree == 3
    assert poly.leading == -1
    assert IntPoly((1, 0, 0)).coeffs == (1,)
    assert IntPoly(()).degree == -1
    assert str(IntPoly(())) == "0"
    assert str(IntPoly((-12, 0, 1))) == "λ^2-12"
    assert str(linear(3)) == "λ+3"

    square = IntPoly((1, 1)) ** 2
    assert square.coeffs == (1, 2, 1)
    assert square(3) == 16
    assert (square * IntPoly((-1, 1))).coeffs == (-1, -1, 1, 1)
    with pytest.raises(ValueError):
        IntPoly((1, 1)) ** -1


def test_int_poly_json():
    poly = IntPoly((10**30, 0, -1))
    document = poly.to_json()
    assert document == {"coeffs": [str(10**30), "0", "-1"]}
    assert IntPoly.from_json(document) == poly


def test_factored_poly():
    factored = FactoredPoly(-1, ((LAMBDA, 21), (linear(3), 2), (linear(-3), 4)))
    assert str(factored) == "-λ^21(λ+3)^2(λ-3)^4"
    assert factored.expand().degree == 27
    assert factored.expand()(3) == 0
    assert factored.expand().leading == -1

    assert str(FactoredPoly(2)) == "2"
    assert str(FactoredPoly(3, ((LAMBDA, 1),))) == "3λ"
    assert str(FactoredPoly(1, ((IntPoly((-1, -1, 1)), 1),))) == "λ^2-λ-1"
    assert str(FactoredPoly(-1, ((IntPoly((-1, -1, 1)), 1),))) == "-(λ^2-λ-1)"
    assert str(FactoredPoly(1, ((linear(1), 2),))) == "(λ+1)^2"
    assert FactoredPoly(1, ((LAMBDA, 0), (linear(1), 1))).factors == ((linear(1), 1),)
    with pytest.raises(ValueError, match="Negative multiplicity"):
        FactoredPoly(1, ((LAMBDA, -1),))

    document = FactoredPoly(-1, ((IntPoly((-2, 0, 1)), 3),)).to_json()
    assert document == {
        "scalar": "-1",
        "factors": [{"coeffs": ["-2", "0", "1"], "multiplicity": 3}],
    }


def test_expand():
    factored = FactoredPoly(1, ((LAMBDA, 4), (linear(-1), 4)))
    assert expand(factored).coeffs == (0, 0, 0, 0, 1, -4, 6, -4, 1)


def test_charpoly_of_small_matrices():
    assert charpoly_dense([[1, 0], [0, 1]]).coeffs == (1, -2, 1)
    assert charpoly_dense(np.zeros((0, 0), dtype=int)).coeffs == (1,)
    assert charpoly_dense([[2, 1], [1, 2]]).coeffs == (3, -4, 1)
    assert charpoly_lowrank(np.zeros((3, 3), dtype=int)).coeffs == (0, 0, 0, -1)
    assert charpoly_lowrank(np.ones((3, 3), dtype=int)).coeffs == (0, 0, 3, -1)
    with pytest.raises(InvalidInputError, match="not square"):
        charpoly_dense([[1, 0]])


def test_lowrank_preconditions():
    with pytest.raises(UnsupportedMatrixError, match="symmetric"):
        charpoly_lowrank([[0, 1], [0, 0]])
    with pytest.raises(UnsupportedMatrixError, match="0/1"):
        charpoly_lowrank([[2]])


@pytest.mark.parametrize(
    "spec, u, coeffs",
    [
        ("zn:8", 1, (0, 0, 0, 0, 1, -4, 6, -4, 1)),
        ("zn:4", 2, (0, 0, -2, 0, 1)),
        ("zn:9", 0, (0, 0, 0, 0, 0, 0, -12, 6, 3, -1)),
        ("zn:2", 0, (-1, -1, 1)),
    ],
)
def test_charpoly_of_product_matrices(spec, u, coeffs):
    matrix = build_product_matrix(build_ring(spec), u)
    assert charpoly_dense(matrix).coeffs == coeffs
    assert charpoly_lowrank(matrix).coeffs == coeffs


def test_determinant():
    assert determinant([[1, 1], [1, 0]]) == -1
    assert determinant([[2, 1], [1, 1]]) == 1
    assert determinant(build_product_matrix(build_zn(4), 0)) == 0
    # det(A) is the constant term of det(A - λI)
    matrix = build_product_matrix(build_zn(3), 1)
    assert determinant(matrix) == charpoly_dense(matrix).coeffs[0]


def test_connected_blocks():
    blocks = connected_blocks(np.array([[1, 0, 1], [0, 0, 0], [1, 0, 0]]))
    assert [list(b) for b in blocks] == [[0, 2], [1]]


def test_schur_det_reduce():
    lhs, rhs = schur_det_reduce(
        np.array([[2]]), np.array([[1]]), np.array([[1]]), np.array([[1]])
    )
    assert lhs == rhs == QQ(1)
    with pytest.raises(InvalidInputError, match="not conformal"):
        schur_det_reduce(np.eye(2), np.ones((2, 1)), np.ones((1, 2)), np.ones((2, 2)))
    with pytest.raises(PreconditionError, match="singular"):
        schur_det_reduce(np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1)), np.eye(1))


def test_schur_block_charpoly():
    assert schur_block_charpoly(3, 1).coeffs == (0, 0, -3, 0, 1)
    assert schur_block_charpoly(2, 1).coeffs == (0, 2, 0, -1)
    assert schur_block_charpoly(9, 3) == IntPoly.monomial(10) * IntPoly((-27, 0, 1))
    for i, j in [(1, 1), (3, 2), (4, 4)]:
        assert schur_block_charpoly(i, j) == charpoly_dense(bipartite_block(i, j))
    with pytest.raises(InvalidInputError, match="must be positive"):
        schur_block_charpoly(0, 2)


@st.composite
def symmetric_01_matrices(draw):
    size = draw(st.integers(min_value=1, max_value=9))
    bits = draw(
        st.lists(
            st.booleans(),
            min_size=size * (size + 1) // 2,
            max_size=size * (size + 1) // 2,
        )
    )
    array = np.zeros((size, size), dtype=np.int64)
    array[np.triu_indices(size)] = bits
    return array | array.T


@settings(deadline=None, max_examples=60)
@given(array=symmetric_01_matrices())
def test_lowrank_agrees_with_dense(array):
    poly = charpoly_dense(array)
    assert charpoly_lowrank(array) == poly
    size = array.shape[0]
    assert poly.degree == size
    # the coefficient of λ^(m-1) is (-1)^(m-1) tr(A)
    assert poly.coeffs[size - 1] == (-1) ** (size - 1) * int(np.trace(array))


@settings(deadline=None, max_examples=30)
@given(
    spec=st.sampled_from(
        ["zn:12", "zn:16", "field:2,3", "polyquot:zn:4;f=x^2", "nullext:3,1;n=2"]
    ),
    data=st.data(),
)
def test_lowrank_agrees_with_dense_on_product_matrices(spec, data):
    ring = build_ring(spec)
    u = data.draw(st.integers(min_value=0, max_value=ring.order - 1))
    matrix = build_product_matrix(ring, u)
    assert charpoly_lowrank(matrix) == charpoly_dense(matrix)
