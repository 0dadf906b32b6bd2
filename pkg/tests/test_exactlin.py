from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from opforge.exactlin import (
    GF, QQ, ZZ, Matrix, NotAnAction, TorsionQuotient, cokernel_presentation,
    group_coinvariants, image_basis, in_span, inverse, kernel_basis, parse_ring,
    quotient_by_span, rank, smith_normal_form, solve,
)


def dense(ring, rows):
    return Matrix.from_dense(ring, rows, cols=len(rows[0]) if rows else 0)


small_ints = st.integers(min_value=-4, max_value=4)


@st.composite
def int_matrices(draw, max_dim=4):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    return [[draw(small_ints) for _ in range(c)] for _ in range(r)]


def test_parse_ring():
    assert parse_ring("Q") == QQ
    assert parse_ring("Z") == ZZ
    assert parse_ring("F5") == GF(5)
    assert parse_ring("Fp:7") == GF(7)
    with pytest.raises(ValueError):
        parse_ring("F4")


def test_scalar_normalization():
    assert QQ("3/6") == Fraction(1, 2)
    assert GF(5)(7) == 2
    assert GF(5).inv(2) == 3
    assert ZZ("-3") == -3
    with pytest.raises(ValueError):
        ZZ("1/2")


def test_snf_small_example():
    m = dense(ZZ, [[2, 4], [6, 8]])
    snf = smith_normal_form(m)
    assert snf.invariant_factors == (2, 4)
    assert snf.left @ m @ snf.right == snf.diagonal(2, 2)


def test_kernel_over_z():
    k = kernel_basis(dense(ZZ, [[2, 4]]))
    assert k.shape == (2, 1)
    v = k.column(0)
    assert {i: abs(x) for i, x in v.items()} == {0: 2, 1: 1}
    assert v[0] * v[1] < 0


def test_cokernel_torsion():
    free, tors = cokernel_presentation(dense(ZZ, [[2, 0], [0, 3], [0, 0]]))
    assert free == 1
    assert sorted(tors) == [6]
    assert cokernel_presentation(dense(QQ, [[2, 0], [0, 3], [0, 0]])) == (1, [])


def test_rank_over_finite_field_differs():
    rows = [[1, 1], [1, -1]]
    assert rank(dense(QQ, rows)) == 2
    assert rank(dense(GF(2), rows)) == 1


def test_solve_and_span():
    a = dense(QQ, [[1, 2], [3, 4]])
    x = solve(a, {0: 5, 1: 6})
    assert a.apply(x) == {0: 5, 1: 6}
    assert solve(dense(ZZ, [[2]]), {0: 1}) is None
    assert in_span(QQ, 2, [{0: 1, 1: 1}], {0: 3, 1: 3})
    assert not in_span(QQ, 2, [{0: 1, 1: 1}], {0: 1})


def test_inverse():
    a = dense(QQ, [[2, 1], [1, 1]])
    assert a @ inverse(a) == Matrix.identity(QQ, 2)


def test_quotient_keeps_low_indices():
    q = quotient_by_span(QQ, 3, [{1: 1, 2: 1}])
    assert q.rank == 2
    assert q.kept == (0, 1)
    assert q.proj.apply({1: 1, 2: 1}) == {}


def test_quotient_over_z_rejects_torsion():
    with pytest.raises(TorsionQuotient):
        quotient_by_span(ZZ, 1, [{0: 2}])


def test_coinvariants_of_swap():
    swap = dense(QQ, [[0, 1], [1, 0]])
    res = group_coinvariants({"s": swap}, [["s", "s"]], 2)
    assert res.free_rank == 1
    assert res.torsion == ()
    assert res.projection.apply({0: 1}) == res.projection.apply({1: 1})


def test_coinvariants_of_sign_over_z_has_torsion():
    res = group_coinvariants({"s": dense(ZZ, [[-1]])}, [["s", "s"]], 1)
    assert res.free_rank == 0
    assert res.torsion == (2,)


def test_coinvariants_reject_non_action():
    with pytest.raises(NotAnAction):
        group_coinvariants({"s": dense(QQ, [[2]])}, [["s", "s"]], 1)


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_rank_matches_sympy(rows):
    assert rank(dense(QQ, rows)) == sympy.Matrix(rows).rank()


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_snf_matches_sympy(rows):
    snf = smith_normal_form(dense(ZZ, rows))
    d = sympy_snf(sympy.Matrix(rows), domain=sympy.ZZ)
    expected = [abs(int(d[i, i])) for i in range(min(d.shape)) if d[i, i] != 0]
    assert list(snf.invariant_factors) == expected
    m = dense(ZZ, rows)
    assert snf.left @ m @ snf.right == snf.diagonal(len(rows), len(rows[0]))


@settings(max_examples=60, deadline=None)
@given(int_matrices(), st.sampled_from(["Q", "Z", "F3", "F5"]))
def test_rank_nullity(rows, rname):
    ring = parse_ring(rname)
    m = dense(ring, rows)
    k = kernel_basis(m)
    assert (m @ k).is_zero()
    assert k.cols + len(image_basis(m)) == m.cols
    assert rank(m) == len(image_basis(m))


@settings(max_examples=40, deadline=None)
@given(int_matrices(), int_matrices())
def test_rank_of_kron_is_product(a, b):
    ma, mb = dense(QQ, a), dense(QQ, b)
    assert rank(ma.kron(mb)) == rank(ma) * rank(mb)
