"""Acceptance gate: one test per criterion, each timed against its budget.

Every test prints a single ``criterion N: PASS|FAIL`` line (also collected in
the terminal summary).
"""
import itertools
import math
import random
import time
from contextlib import contextmanager

import pytest

from conftest import ACCEPTANCE_LINES
from oracles import multilinear_part_ranks

from opforge.algebras import (
    CONSISTENT, FAILS, admissibility_probe, free_algebra, initial_algebra, presentation,
)
from opforge.complexes import ChainMap, DgComplex, cone_of_identity, direct_sum, homology, random_complex
from opforge.envelopes import (
    base_inclusion, check_representation, direct_pushout, enveloping_operad,
    module_to_representation, pushout_filtration, regular_module, representation_to_module,
)
from opforge.exactlin import GF, QQ, ZZ, Matrix, rank, smith_normal_form
from opforge.operads import (
    AssOperad, ComOperad, PlanarCom, SymmetrizedOperad, check_operad_axioms,
    check_operad_map, module_operad, prop_from_operad, random_poset_com,
)
from opforge.simplicial import (
    check_aw_coassociativity, check_aw_em, check_dold_kan_roundtrip, check_em_symmetry,
    check_polyforms, dold_kan_inverse, omega_forms,
)
from opforge.splittings import (
    check_splitting, contraction_data, free_algebra_homotopy, ideal_stability_check,
    induced_splitting_on_MO, planar_splitting, rational_splitting,
)

STAR = "*"


def arity(n):
    return (STAR,) * n


@contextmanager
def criterion(number, budget, what):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        line = f"criterion {number}: {status} ({what}; {elapsed:.2f}s of {budget}s)"
        ACCEPTANCE_LINES[number] = line
        print(line)


def vsub(ring, a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) - v
    out = {k: ring.norm(v) for k, v in out.items()}
    return {k: v for k, v in out.items() if v}


# 1 -------------------------------------------------------------------------

def test_criterion_1_dold_kan_identities():
    with criterion(1, 30, "Dold-Kan: AW∘EM = id, EM symmetry, AW coassociativity, C∘N = id"):
        pairs = 0
        for rname, ring in (("Q", QQ), ("F5", GF(5))):
            for seed in range(12):
                rng = random.Random(1000 * len(rname) + seed)
                X = random_complex(ring, rng, [-1, 0], max_rank=1, prefix="a")
                Y = random_complex(ring, rng, [-1, 0], max_rank=1, prefix="b")
                n_max = 2 if seed % 2 else 3
                M, N = dold_kan_inverse(X, n_max), dold_kan_inverse(Y, n_max)
                assert sum(M.rank(n) for n in range(n_max + 1)) <= 30
                assert check_aw_em(M, N).ok, (rname, seed)
                assert check_em_symmetry(M, N).ok, (rname, seed)
                if n_max == 2:
                    assert check_aw_coassociativity(M, N, M).ok, (rname, seed)
                pairs += 1
        assert pairs >= 20
        for ring in (QQ, GF(5)):
            for seed in range(10):
                X = random_complex(ring, random.Random(seed), [-3, -2, -1, 0], max_rank=4)
                assert check_dold_kan_roundtrip(X, 4).ok, seed


# 2 -------------------------------------------------------------------------

def test_criterion_2_sigma_splitting_axioms():
    with criterion(2, 60, "Σ-splitting SPL/INV/COM on Com, Ass, MCom, MAss, seeded operads"):
        A = 4
        rational = [
            ComOperad(QQ, A), AssOperad(QQ, A),
            module_operad(ComOperad(QQ, A)), module_operad(AssOperad(QQ, A)),
        ]
        for O in rational:
            rep = check_splitting(rational_splitting(O))
            assert rep.ok, (O, rep.summary())
            assert set(rep.counts) >= {"SPL", "INV", "COM"}
        planar_ass = planar_splitting(SymmetrizedOperad(PlanarCom(GF(2), A)))
        assert check_splitting(planar_ass).ok
        assert check_splitting(induced_splitting_on_MO(planar_ass)).ok
        for seed in (0, 2, 4, 6, 8):
            O = random_poset_com(QQ, random.Random(seed), n_colors=2, max_arity=A)
            assert check_splitting(rational_splitting(O)).ok, seed
            P = random_poset_com(GF(2), random.Random(seed), n_colors=2, max_arity=A, planar=True)
            assert check_splitting(planar_splitting(SymmetrizedOperad(P))).ok, seed


# 3 -------------------------------------------------------------------------

def identity_defect(H, color):
    """First basis element where dH + Hd != id - F(alpha), or None."""
    F, ring = H.F, H.ring
    for lab in F.complex(color).all_labels():
        e = {lab: ring.one}
        dh = F.d(color, H.apply(color, e))
        hd = H.apply(color, F.d(color, e))
        lhs = vsub(ring, dh, {k: -v for k, v in hd.items()})
        rhs = vsub(ring, e, H.F_alpha(color, e))
        if lhs != rhs:
            return lab
    return None


def test_criterion_3_homotopy_identity():
    with criterion(3, 60, "dH + Hd = id - F(α) through arity 4; ideal stability"):
        # Com over Q: cone plus one free letter (rank 3)
        V = {STAR: direct_sum(cone_of_identity(QQ, 0), DgComplex(QQ, {0: ["g"]}), tags=("c", "f"))}
        alpha, h = contraction_data(V, {STAR: [(("c", "x"), ("c", "dx"))]})
        H = free_algebra_homotopy(rational_splitting(ComOperad(QQ, 4)), V, alpha, h, 4)
        assert identity_defect(H, STAR) is None
        assert H.check_identity().ok
        # Ass over F2 with the planar splitting: cone plus an odd letter (rank 3)
        S = SymmetrizedOperad(PlanarCom(GF(2), 4))
        V2 = {STAR: direct_sum(cone_of_identity(GF(2), 0), DgComplex(GF(2), {1: ["u"]}), tags=("c", "u"))}
        alpha2, h2 = contraction_data(V2, {STAR: [(("c", "x"), ("c", "dx"))]})
        H2 = free_algebra_homotopy(planar_splitting(S), V2, alpha2, h2, 4)
        assert identity_defect(H2, STAR) is None
        assert H2.check_identity().ok
        # ideal stability on A ⊕ Cone(id)
        k = DgComplex(QQ, {0: ["a"]})
        O = ComOperad(QQ, 3)
        A = presentation(O, {STAR: k}, [(STAR, {(arity(2), "mu", ("a", "a")): 1})], 3)
        assert ideal_stability_check(rational_splitting(O), A, STAR, 0, 3).ok
        x2 = next(iter(SymmetrizedOperad(PlanarCom(GF(2), 3)).component(arity(2), STAR).all_labels()))
        S3 = SymmetrizedOperad(PlanarCom(GF(2), 3))
        B = presentation(S3, {STAR: DgComplex(GF(2), {0: ["a"]})}, [(STAR, {(arity(2), x2, ("a", "a")): 1})], 3)
        assert ideal_stability_check(planar_splitting(S3), B, STAR, 0, 3).ok


# 4 -------------------------------------------------------------------------

def by_hand_sym2_homology():
    """Arity-2 part of F(Cone(id)) over F2, written out by hand.

    Basis xx, x·dx, dx·dx; d(xx) = 2 x·dx = 0 and d(x·dx) = dx·dx, so H⁰ is
    spanned by xx and everything else cancels.
    """
    F2 = GF(2)
    sym2 = DgComplex(F2, {0: ["xx"], 1: ["xdx"], 2: ["dxdx"]},
                     {0: Matrix.from_dense(F2, [[0]]), 1: Matrix.from_dense(F2, [[1]])})
    return homology(sym2).ranks()


def test_criterion_4_probe_trichotomy():
    with criterion(4, 10, "admissibility probe trichotomy"):
        assert admissibility_probe(ComOperad(QQ, 3), None, STAR, 0, 3).verdict == CONSISTENT
        assert admissibility_probe(SymmetrizedOperad(PlanarCom(GF(2), 3)), None, STAR, 0, 3).verdict == CONSISTENT
        assert admissibility_probe(AssOperad(GF(2), 3), None, STAR, 0, 3).verdict == CONSISTENT
        bad = admissibility_probe(ComOperad(GF(2), 2), None, STAR, 0, 2)
        assert bad.verdict == FAILS
        assert bad.witness == "nonzero H⁰ class x² in the arity-2 component"
        assert by_hand_sym2_homology() == {0: 1}


# 5 -------------------------------------------------------------------------

def is_isomorphism(m, ring):
    for n in set(m.source.degrees()) | set(m.target.degrees()):
        blk = m.block(n)
        if blk.rows != blk.cols:
            return False
        if blk.rows == 0:
            continue
        if rank(blk) != blk.rows:
            return False
        if ring.kind == "Z" and any(abs(v) != 1 for v in smith_normal_form(blk).invariant_factors):
            return False
    return True


def pushout_instances(ring):
    def free(names, deg=0):
        return ChainMap(DgComplex(ring, {}), DgComplex(ring, {deg: names}), {})

    com, ass, ucom = ComOperad(ring, 4), AssOperad(ring, 4), ComOperad(ring, 4, unital=True)
    a_sq = presentation(com, {STAR: DgComplex(ring, {0: ["a"]})},
                        [(STAR, {(arity(2), "mu", ("a", "a")): 1})], 3)
    one_letter = DgComplex(ring, {0: ["v"]})
    two_letters = DgComplex(ring, {0: ["v", "w"]})
    grow = ChainMap(one_letter, two_letters, {0: Matrix.from_columns(ring, 2, [{0: 1}])})
    out = [
        ("initial+free", com, initial_algebra(com, 3), {STAR: free(["w"])}, None),
        ("a²=0 + free", com, a_sq, {STAR: free(["w"])}, None),
        ("attach v↦a", com, free_algebra(com, {STAR: DgComplex(ring, {0: ["a"]})}, 3),
         {STAR: grow}, {STAR: {"v": {((STAR,), "mu", ("a",)): ring.one}}}),
        ("Ass two letters", ass, initial_algebra(ass, 3), {STAR: free(["p", "q"])}, None),
    ]
    cone = {STAR: ChainMap(DgComplex(ring, {}), cone_of_identity(ring, 0), {})}
    if ring.kind == "Z":
        # Com on the odd letter dx leaves 2 dx² = 0 torsion over Z; use Ass there
        out.append(("Ass cone", ass, initial_algebra(ass, 3), cone, None))
    else:
        out.append(("uCom cone", ucom, initial_algebra(ucom, 3), cone, None))
    return out


def test_criterion_5_pushout_filtration():
    with criterion(5, 120, "pushout filtration vs direct pushout, ranks and explicit iso"):
        for ring in (QQ, ZZ, GF(3)):
            done = 0
            for name, O, A, f, attach in pushout_instances(ring):
                res = pushout_filtration(O, A, f, 3, attach=attach)
                assert res.ok, (ring, name, res.failure)
                D = direct_pushout(O, A, f, 3, attach=attach)
                for col in O.colors:
                    got = {n: r for n, r in res.colimit(col).ranks.items() if r}
                    want = {n: r for n, r in D.complex(col).ranks.items() if r}
                    assert got == want, (ring, name)
                    cmp = res.comparison[col]
                    assert cmp.is_chain_map()
                    assert is_isomorphism(cmp, ring), (ring, name)
                done += 1
            assert done >= 3


# 6 -------------------------------------------------------------------------

def test_criterion_6_free_closed_forms():
    with criterion(6, 5, "free-algebra closed forms over Q, Z, F_p"):
        for ring in (QQ, ZZ, GF(2), GF(5)):
            a = {STAR: DgComplex(ring, {0: ["a"]})}
            ab = {STAR: DgComplex(ring, {0: ["a", "b"]})}
            assert free_algebra(ComOperad(ring, 4), a, 3).arity_ranks(STAR)[1:] == [1, 1, 1]
            assert free_algebra(AssOperad(ring, 4), a, 3).arity_ranks(STAR)[1:] == [1, 1, 1]
            assert free_algebra(AssOperad(ring, 4), ab, 2).complex(STAR).total_rank() == 2 + 4
            assert free_algebra(ComOperad(ring, 4), ab, 2).complex(STAR).total_rank() == 2 + math.comb(3, 2)


# 7 -------------------------------------------------------------------------

def a_squared(O, N=3):
    x2 = next(iter(O.component(arity(2), STAR).all_labels()))
    return presentation(O, {STAR: DgComplex(O.ring, {0: ["a"]})}, [(STAR, {(arity(2), x2, ("a", "a")): 1})], N)


def test_criterion_7_enveloping_constructions():
    with criterion(7, 30, "envelope of initial = O, U(A) ranks vs oracle, converter round trip"):
        for O in (ComOperad(QQ, 3), AssOperad(GF(3), 3), ComOperad(ZZ, 3, unital=True)):
            E = enveloping_operad(O, initial_algebra(O, 3), 0)
            inc = base_inclusion(E)
            assert check_operad_map(inc).ok
            for n in range(4):
                for c, d in O.signatures(n):
                    for blk in inc.component_map(c, d).blocks().values():
                        assert blk == Matrix.identity(O.ring, blk.rows)
                    assert E.component(c, d).ranks == O.component(c, d).ranks
        for O, want in ((ComOperad(QQ, 4), 2), (ComOperad(QQ, 4, unital=True), 2), (AssOperad(QQ, 4), 4)):
            A = a_squared(O)
            E = enveloping_operad(O, A, 2)
            comp = E.component(arity(1), STAR)
            assert comp.total_rank() == want
            assert comp.ranks == multilinear_part_ranks(O, A, arity(1), STAR, 2)
        for O in (ComOperad(QQ, 4), AssOperad(GF(2), 4), ComOperad(ZZ, 4, unital=True)):
            mod = regular_module(a_squared(O), 2)
            rep = module_to_representation(mod)
            assert check_representation(rep).ok
            assert representation_to_module(rep, mod).table == mod.table


# 8 -------------------------------------------------------------------------

def surjection_weighted(m, n, unital=False):
    total = 0
    for f in itertools.product(range(n), repeat=m):
        sizes = [f.count(j) for j in range(n)]
        if not unital and 0 in sizes:
            continue
        total += math.prod(math.factorial(s) for s in sizes)
    return total


def test_criterion_8_prop_ranks():
    with criterion(8, 10, "PROP hom ranks for m + n <= 6"):
        ucom = prop_from_operad(ComOperad(QQ, 6, unital=True))
        ass = prop_from_operad(AssOperad(QQ, 6))
        for m in range(0, 7):
            for n in range(0, 7 - m):
                if m + n == 0:
                    continue
                assert ucom.prop_hom(arity(m), arity(n)).total_rank() == n ** m, (m, n)
                assert ass.prop_hom(arity(m), arity(n)).total_rank() == surjection_weighted(m, n), (m, n)


# 9 -------------------------------------------------------------------------

def test_criterion_9_mo_inheritance():
    with criterion(9, 30, "induced splittings on MO and MO axioms"):
        for s in (rational_splitting(ComOperad(QQ, 4)), rational_splitting(AssOperad(QQ, 4)),
                  planar_splitting(SymmetrizedOperad(PlanarCom(GF(2), 4))),
                  planar_splitting(SymmetrizedOperad(PlanarCom(ZZ, 3, unital=True)))):
            t = induced_splitting_on_MO(s)
            assert check_operad_axioms(t.operad).ok
            rep = check_splitting(t)
            assert rep.ok, rep.summary()


# 10 ------------------------------------------------------------------------

@pytest.mark.filterwarnings("ignore")
def test_criterion_10_polynomial_forms():
    with criterion(10, 10, "Ω_n identities and H = k for n <= 2, D <= 3"):
        for n in range(3):
            for D in range(4):
                P = omega_forms(n, D, QQ)
                assert check_polyforms(P).ok, (n, D)
                assert homology(P.complex).ranks() == {0: 1}, (n, D)
