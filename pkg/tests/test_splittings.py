import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from opforge.algebras import free_algebra, initial_algebra, presentation
from opforge.complexes import DgComplex, cone_of_identity, direct_sum
from opforge.exactlin import GF, QQ, ZZ
from opforge.operads import (
    AssOperad, ComOperad, DgaCoefficients, PlanarCom, SymmetrizedOperad,
    exterior_dga, random_poset_com,
)
from opforge.simplicial import CharNotZero
from opforge.splittings import (
    BadHomotopy, FreeAlgebraHomotopy, check_splitting, contraction_data,
    corrupt_splitting, free_algebra_homotopy, ideal_stability_check,
    induced_splitting_on_MO, orders, planar_splitting, rational_splitting,
)

STAR = "*"


def arity(n):
    return (STAR,) * n


def vsub(ring, a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) - v
    out = {k: ring.norm(v) for k, v in out.items()}
    return {k: v for k, v in out.items() if v}


def vadd(ring, a, b):
    return vsub(ring, a, {k: -v for k, v in b.items()})


def test_orders():
    assert len(list(orders(3))) == 6
    assert list(orders(1)) == [(0,)]


def test_rational_splitting_values():
    O = ComOperad(QQ, 3)
    s = rational_splitting(O)
    assert s.t_label(arity(1), STAR, (0,), "mu") == {"mu": 1}
    for theta in orders(3):
        assert s.t_label(arity(3), STAR, theta, "mu") == {"mu": Fraction(1, 6)}


def test_rational_splitting_needs_char_zero():
    with pytest.raises(CharNotZero):
        rational_splitting(ComOperad(GF(3), 3))


def test_planar_splitting_projects_onto_orderings():
    S = SymmetrizedOperad(PlanarCom(GF(2), 3))
    s = planar_splitting(S)
    for theta in orders(3):
        for lab in S.component(arity(3), STAR).all_labels():
            got = s.t_label(arity(3), STAR, theta, lab)
            assert got == ({lab: 1} if lab[0] == theta else {})


@pytest.mark.parametrize("make", [
    lambda: rational_splitting(ComOperad(QQ, 4)),
    lambda: rational_splitting(ComOperad(QQ, 4, unital=True)),
    lambda: rational_splitting(AssOperad(QQ, 3)),
    lambda: planar_splitting(SymmetrizedOperad(PlanarCom(GF(2), 4))),
    lambda: planar_splitting(SymmetrizedOperad(PlanarCom(ZZ, 3, unital=True))),
], ids=["Com", "uCom", "Ass-rational", "Ass-planar-F2", "uAss-planar-Z"])
def test_canonical_splittings_pass(make):
    rep = check_splitting(make())
    assert rep.ok, rep.summary()
    assert set(rep.counts) >= {"SPL", "INV", "COM"}


def test_zeroed_t_fails_spl():
    s = corrupt_splitting(rational_splitting(ComOperad(QQ, 3)), arity(3), STAR, (0, 1, 2))
    rep = check_splitting(s)
    assert not rep.ok
    assert "SPL" in rep.failure
    assert rep.witness


def test_induced_splittings_on_module_operads():
    for s in (rational_splitting(ComOperad(QQ, 3)),
              planar_splitting(SymmetrizedOperad(PlanarCom(GF(2), 3)))):
        rep = check_splitting(induced_splitting_on_MO(s))
        assert rep.ok, rep.summary()


def cone_setup(ring, O, N):
    V = {STAR: cone_of_identity(ring, 0)}
    alpha, h = contraction_data(V, {STAR: [("x", "dx")]})
    return V, alpha, h


def test_identity_alpha_gives_zero_homotopy():
    O = ComOperad(QQ, 3)
    V = {STAR: direct_sum(cone_of_identity(QQ, 0), DgComplex(QQ, {0: ["u"]}), tags=("c", "u"))}
    alpha, h = contraction_data(V)
    H = free_algebra_homotopy(rational_splitting(O), V, alpha, h, 3)
    for lab in H.F.complex(STAR).all_labels():
        assert H.apply(STAR, {lab: 1}) == {}


def test_arity_one_homotopy_is_h():
    O = ComOperad(QQ, 3)
    V, alpha, h = cone_setup(QQ, O, 3)
    H = free_algebra_homotopy(rational_splitting(O), V, alpha, h, 3)
    F = H.F
    assert H.apply(STAR, F.generator(STAR, "dx")) == F.generator(STAR, "x")
    assert H.apply(STAR, F.generator(STAR, "x")) == {}


def test_bad_homotopy_rejected():
    O = ComOperad(QQ, 3)
    V = {STAR: cone_of_identity(QQ, 0)}
    alpha, h = contraction_data(V, {STAR: [("x", "dx")]})
    alpha_bad, _ = contraction_data(V)
    with pytest.raises(BadHomotopy):
        free_algebra_homotopy(rational_splitting(O), V, alpha_bad, h, 3)


def direct_identity_check(H, color):
    """dH + Hd = id - F(alpha), each side computed label by label."""
    F, ring = H.F, H.ring
    for lab in F.complex(color).all_labels():
        e = {lab: ring.one}
        lhs = vadd(ring, F.d(color, H.apply(color, e)), H.apply(color, F.d(color, e)))
        rhs = vsub(ring, e, H.F_alpha(color, e))
        if lhs != rhs:
            return lab
    return None


def test_homotopy_identity_com_rational():
    O = ComOperad(QQ, 4)
    V, alpha, h = cone_setup(QQ, O, 4)
    H = free_algebra_homotopy(rational_splitting(O), V, alpha, h, 4)
    assert direct_identity_check(H, STAR) is None
    assert H.check_identity().ok
    assert H.check_descent().ok
    # alpha = 0 on the cone, so F(alpha) vanishes on every positive arity
    assert all(not H.F_alpha(STAR, {lab: 1}) for lab in H.F.complex(STAR).all_labels())


def test_homotopy_identity_ass_planar_f2():
    S = SymmetrizedOperad(PlanarCom(GF(2), 4))
    V = {STAR: direct_sum(cone_of_identity(GF(2), 0), DgComplex(GF(2), {1: ["u"]}), tags=("c", "u"))}
    alpha, h = contraction_data(V, {STAR: [(("c", "x"), ("c", "dx"))]})
    H = free_algebra_homotopy(planar_splitting(S), V, alpha, h, 3)
    assert direct_identity_check(H, STAR) is None
    assert H.check_identity().ok


def test_operation_sign_matters():
    # odd operations come from exterior coefficients; dropping their sign breaks the identity
    O = DgaCoefficients(ComOperad(QQ, 3), exterior_dga(QQ, 1))
    V = {STAR: cone_of_identity(QQ, 0)}
    alpha, h = contraction_data(V, {STAR: [("x", "dx")]})
    F = free_algebra(O, V, 3)
    good = FreeAlgebraHomotopy(rational_splitting(O), F, alpha, h)
    bad = FreeAlgebraHomotopy(rational_splitting(O), F, alpha, h, operation_sign=False)
    assert direct_identity_check(good, STAR) is None
    assert direct_identity_check(bad, STAR) is not None


def test_ideal_stability():
    O = ComOperad(QQ, 3)
    mu = "mu"
    k = DgComplex(QQ, {0: ["a"]})
    A = presentation(O, {STAR: k}, [(STAR, {(arity(2), mu, ("a", "a")): 1})], 3)
    assert ideal_stability_check(rational_splitting(O), A, STAR, 0, 3).ok
    assert ideal_stability_check(rational_splitting(O), free_algebra(O, {STAR: k}, 3), STAR, 0, 3).ok
    assert ideal_stability_check(rational_splitting(O), initial_algebra(O, 3), STAR, 0, 3).ok
    S = SymmetrizedOperad(PlanarCom(GF(2), 3))
    x2 = next(iter(S.component(arity(2), STAR).all_labels()))
    k2 = DgComplex(GF(2), {0: ["a"]})
    B = presentation(S, {STAR: k2}, [(STAR, {(arity(2), x2, ("a", "a")): 1})], 3)
    assert ideal_stability_check(planar_splitting(S), B, STAR, 0, 3).ok


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 1000))
def test_rational_splitting_on_random_operads(seed):
    O = random_poset_com(QQ, random.Random(seed), n_colors=2, max_arity=3)
    assert check_splitting(rational_splitting(O)).ok


@settings(max_examples=6, deadline=None)
@given(st.sampled_from(["Q", "Z", "F2"]), st.integers(0, 1000))
def test_planar_splitting_on_random_operads(rname, seed):
    from opforge.exactlin import parse_ring
    P = random_poset_com(parse_ring(rname), random.Random(seed), n_colors=2, max_arity=3, planar=True)
    assert check_splitting(planar_splitting(SymmetrizedOperad(P))).ok


@settings(max_examples=15, deadline=None)
@given(st.integers(-1, 1), st.sampled_from([None, -1, 0, 1]))
def test_homotopy_identity_over_generator_shapes(cone_deg, extra_deg):
    # V = a cone in some degree plus at most one free generator; total rank <= 3
    parts, tags = [cone_of_identity(QQ, cone_deg)], ["c"]
    if extra_deg is not None:
        parts.append(DgComplex(QQ, {extra_deg: ["g"]}))
        tags.append("f")
    V = {STAR: direct_sum(*parts, tags=tags)}
    alpha, h = contraction_data(V, {STAR: [(("c", "x"), ("c", "dx"))]})
    O = ComOperad(QQ, 3)
    H = free_algebra_homotopy(rational_splitting(O), V, alpha, h, 3)
    assert direct_identity_check(H, STAR) is None
