import random

import pytest
from hypothesis import given, settings, strategies as st

from opforge.algebras import free_algebra, initial_algebra, presentation
from opforge.complexes import ChainMap, DgComplex, is_quasi_iso
from opforge.envelopes import (
    NotACofibration, NotSplit, base_inclusion, check_module_axioms,
    check_representation, cube_wedge, direct_pushout, enveloping_category,
    enveloping_operad, module_to_representation, pushout_filtration, regular_module,
    representation_to_module, zero_module,
)
from opforge.exactlin import GF, QQ, ZZ, Matrix, parse_ring, rank
from opforge.operads import (
    AssOperad, ComOperad, PlanarCom, SymmetrizedOperad, check_operad_axioms,
    check_operad_map, random_poset_com,
)
from opforge.splittings import (
    check_splitting, induced_splitting_on_MO, planar_splitting, rational_splitting,
)

from oracles import multilinear_part_ranks

STAR = "*"


def arity(n):
    return (STAR,) * n


def a_squared(O, N=3):
    col = O.colors[0]
    x2 = next(iter(O.component((col, col), col).all_labels()))
    V = {col: DgComplex(O.ring, {0: ["a"]})}
    return presentation(O, V, [(col, {((col, col), x2, ("a", "a")): 1})], N)


def test_envelope_of_initial_is_operad():
    for O in (ComOperad(QQ, 3), AssOperad(GF(3), 3), ComOperad(ZZ, 3, unital=True)):
        E = enveloping_operad(O, initial_algebra(O, 3), 0)
        assert E.max_arity == O.max_arity
        inc = base_inclusion(E)
        assert check_operad_map(inc).ok
        for n in range(0, 4):
            for c, d in O.signatures(n):
                assert E.component(c, d).ranks == O.component(c, d).ranks
                m = inc.component_map(c, d)
                assert is_quasi_iso(m).ok
                for k, blk in m.blocks().items():
                    assert blk == Matrix.identity(O.ring, blk.rows)


@pytest.mark.parametrize("unital", [False, True])
def test_envelope_rank_two(unital):
    O = ComOperad(QQ, 4, unital=unital)
    A = a_squared(O)
    E = enveloping_operad(O, A, 2)
    assert E.component(arity(1), STAR).total_rank() == 2
    assert E.component(arity(1), STAR).ranks == multilinear_part_ranks(O, A, arity(1), STAR, 2)
    assert check_operad_axioms(E, max_arity=2).ok


def test_envelope_ass_rank_four():
    O = AssOperad(QQ, 4)
    A = a_squared(O, 3)
    E = enveloping_operad(O, A, 2)
    assert E.component(arity(1), STAR).total_rank() == 4
    assert E.component(arity(1), STAR).ranks == multilinear_part_ranks(O, A, arity(1), STAR, 2)


def test_enveloping_category():
    O = ComOperad(QQ, 4)
    A = a_squared(O)
    U = enveloping_category(O, A, 2)
    assert U.hom(STAR, STAR).total_rank() == 2
    assert U.check().ok
    table = U.composition_table(STAR)
    assert table


def test_cube_wedge_examples():
    k = DgComplex(QQ, {0: ["v"]})
    k2 = DgComplex(QQ, {0: ["v", "w"]})
    inc = ChainMap(k, k2, {0: Matrix.from_columns(QQ, 2, [{0: 1}])})
    cw = cube_wedge([inc, inc])
    assert cw.source.total_rank() == 3
    assert cw.target.total_rank() == 4
    assert all(b.rows >= b.cols for b in cw.map.blocks().values())
    assert all(rank(b) == b.cols for b in cw.map.blocks().values())
    zero = ChainMap(DgComplex(QQ, {}), k, {})
    cz = cube_wedge([zero, zero])
    assert cz.source.total_rank() == 0
    assert cz.target.total_rank() == 1
    single = cube_wedge([inc])
    assert single.source.ranks == k.ranks
    assert single.target.ranks == k2.ranks


def test_cube_wedge_rejects_non_split():
    k = DgComplex(ZZ, {0: ["v"]})
    twice = ChainMap(k, k, {0: Matrix.from_dense(ZZ, [[2]])})
    with pytest.raises(NotSplit):
        cube_wedge([twice])


def free_cofibration(ring):
    return ChainMap(DgComplex(ring, {}), DgComplex(ring, {0: ["w"]}), {})


def test_pushout_free_on_initial():
    O = ComOperad(QQ, 4)
    res = pushout_filtration(O, initial_algebra(O, 3), {STAR: free_cofibration(QQ)}, 3)
    assert res.ok, res.failure
    assert res.colimit(STAR).ranks == free_algebra(O, {STAR: DgComplex(QQ, {0: ["w"]})}, 3).complex(STAR).ranks
    assert res.colimit(STAR).total_rank() == 3


def test_pushout_identity_is_trivial():
    O = ComOperad(QQ, 4)
    A = a_squared(O)
    W = DgComplex(QQ, {0: ["w"]})
    res = pushout_filtration(O, A, {STAR: ChainMap.identity(W)}, 3)
    assert res.ok
    assert res.colimit(STAR).ranks == A.complex(STAR).ranks


def test_pushout_matches_direct_presentation():
    O = ComOperad(QQ, 4)
    A = a_squared(O)
    f = {STAR: free_cofibration(QQ)}
    res = pushout_filtration(O, A, f, 3)
    assert res.ok
    D = direct_pushout(O, A, f, 3)
    assert res.colimit(STAR).ranks == D.complex(STAR).ranks
    # monomials in a, w with a^2 = 0 up to length 3
    assert D.complex(STAR).total_rank() == 6


def test_pushout_rejects_non_injective():
    O = ComOperad(QQ, 3)
    k = DgComplex(QQ, {0: ["v"]})
    with pytest.raises((NotACofibration, NotSplit)):
        pushout_filtration(O, initial_algebra(O, 2), {STAR: ChainMap.zero(k, k)}, 2)


def test_pushout_stages_are_degreewise_free():
    O = ComOperad(ZZ, 4)
    res = pushout_filtration(O, a_squared(O), {STAR: free_cofibration(ZZ)}, 3)
    assert res.ok
    assert res.degreewise_free


def test_regular_and_zero_modules():
    O = ComOperad(QQ, 3)
    A = a_squared(O)
    reg = regular_module(A, 2)
    assert check_module_axioms(reg).ok
    assert check_module_axioms(zero_module(A)).ok


def test_corrupted_module_fails():
    O = ComOperad(QQ, 4)
    F = free_algebra(O, {STAR: DgComplex(QQ, {0: ["a"]})}, 3)
    reg = regular_module(F, 2)
    bad = reg.corrupt()
    rep = check_module_axioms(bad)
    assert not rep.ok
    assert rep.witness


@pytest.mark.parametrize("O", [ComOperad(QQ, 4), AssOperad(GF(2), 4), ComOperad(ZZ, 4, unital=True)],
                         ids=["Com-Q", "Ass-F2", "uCom-Z"])
def test_module_representation_round_trip(O):
    A = a_squared(O)
    mod = regular_module(A, 2)
    rep = module_to_representation(mod)
    assert check_representation(rep).ok
    back = representation_to_module(rep, mod)
    assert back.table == mod.table


def test_induced_splittings_on_mo():
    for s in (rational_splitting(ComOperad(QQ, 4)), rational_splitting(AssOperad(QQ, 3)),
              planar_splitting(SymmetrizedOperad(PlanarCom(GF(2), 4)))):
        t = induced_splitting_on_MO(s)
        assert check_operad_axioms(t.operad).ok
        assert check_splitting(t).ok


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(["Q", "Z", "F2", "F3"]), st.integers(0, 10_000))
def test_pushout_comparison_on_seeded_instances(rname, seed):
    ring = parse_ring(rname)
    rng = random.Random(seed)
    O = rng.choice([ComOperad(ring, 4), AssOperad(ring, 4), ComOperad(ring, 4, unital=True)])
    A = rng.choice([initial_algebra(O, 3), a_squared(O)])
    names = [f"w{i}" for i in range(rng.randint(1, 2))]
    W = DgComplex(ring, {0: names})
    res = pushout_filtration(O, A, {STAR: ChainMap(DgComplex(ring, {}), W, {})}, 3)
    assert res.ok, res.failure
    D = direct_pushout(O, A, {STAR: ChainMap(DgComplex(ring, {}), W, {})}, 3)
    assert res.colimit(STAR).ranks == D.complex(STAR).ranks


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000))
def test_envelope_matches_oracle_on_seeded_operads(seed):
    O = random_poset_com(QQ, random.Random(seed), n_colors=2, max_arity=3)
    col = O.colors[0]
    col2 = O.colors[-1]
    x2 = next(iter(O.component((col2, col2), col2).all_labels()), None)
    V = {col2: DgComplex(QQ, {0: ["a"]})}
    rels = [(col2, {((col2, col2), x2, ("a", "a")): 1})] if x2 is not None else []
    A = presentation(O, V, rels, 2)
    E = enveloping_operad(O, A, 2)
    for d in O.colors:
        assert E.component((col,), d).ranks == multilinear_part_ranks(O, A, (col,), d, 2)
