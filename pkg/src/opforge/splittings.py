"""Sigma-splittings: data, the SPL/INV/COM checker and the canonical examples.

An ordering theta of the inputs of ``O(c, d)`` is stored as the tuple
``order`` listing the inputs by increasing theta-position, so
``theta(order[k]) = k``.  For a permutation ``s`` the action sends ``x`` of
ordering ``order`` to ``x . s`` of ordering ``s^{-1}(order)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from opforge.complexes import lvec_add
from opforge.operads.base import (
    AxiomReport, ColoredDgOperad, _eq, act_on_colors, adjacent_transpositions, full_composition,
    perm_inverse,
)
from opforge.operads.constructions import ModuleOperad, SymmetrizedOperad
from opforge.simplicial import CharNotZero
from opforge.algebras import koszul_sign

__all__ = [
    "SigmaSplitting", "check_splitting", "rational_splitting", "planar_splitting",
    "induced_splitting_on_MO", "corrupt_splitting", "orders", "BadHomotopy",
    "FreeAlgebraHomotopy", "free_algebra_homotopy", "contraction_data", "ideal_stability_check",
]


def orders(n: int):
    return itertools.permutations(range(n))


class SigmaSplitting:
    """Component maps ``t_order: O(c, d) -> O(c, d)`` given on basis labels."""

    def __init__(self, operad: ColoredDgOperad, t: Callable, name: str = "t"):
        self.operad = operad
        self._t = t
        self.name = name
        self._cache: dict = {}

    def t_label(self, c, d, order, x) -> dict:
        key = (tuple(c), d, tuple(order), x)
        got = self._cache.get(key)
        if got is None:
            got = {k: v for k, v in self._t(tuple(c), d, tuple(order), x).items() if v}
            self._cache[key] = got
        return got

    def t(self, c, d, order, vec: Mapping) -> dict:
        ring = self.operad.ring
        out: dict = {}
        for x, u in vec.items():
            for z, v in self.t_label(c, d, order, x).items():
                out[z] = out.get(z, 0) + u * v
        return {z: ring.norm(w) for z, w in out.items() if ring.norm(w)}


def rational_splitting(O: ColoredDgOperad) -> SigmaSplitting:
    """``t_theta = id / n!``."""
    ring = O.ring
    if not (ring.is_field and ring.characteristic == 0):
        raise CharNotZero(f"the rational splitting needs characteristic 0, got {ring}")

    def t(c, d, order, x):
        return {x: Fraction(1, math.factorial(len(c)))}

    return SigmaSplitting(O, t, name="rational")


def planar_splitting(S: SymmetrizedOperad) -> SigmaSplitting:
    """Projection of ``P^Sigma(c, d)`` onto the summand of the given ordering."""
    if not isinstance(S, SymmetrizedOperad):
        raise TypeError("planar_splitting needs a symmetrized planar operad")
    one = S.ring.one

    def t(c, d, order, x):
        return {x: one} if x[0] == order else {}

    return SigmaSplitting(S, t, name="planar")


def induced_splitting_on_MO(s: SigmaSplitting, MO: ModuleOperad | None = None) -> SigmaSplitting:
    """The same component maps on the nonzero components of ``MO``."""
    MO = MO or ModuleOperad(s.operad)
    strip = ModuleOperad.strip

    def t(c, d, order, x):
        return s.t_label(strip(c), d[0], order, x)

    return SigmaSplitting(MO, t, name=f"M({s.name})")


def corrupt_splitting(s: SigmaSplitting, c, d, order) -> SigmaSplitting:
    """``s`` with one component ``t_order`` on ``O(c, d)`` replaced by zero."""
    c, order = tuple(c), tuple(order)

    def t(cc, dd, oo, x):
        if (cc, dd, oo) == (c, d, order):
            return {}
        return s.t_label(cc, dd, oo, x)

    return SigmaSplitting(s.operad, t, name=f"{s.name}*")


# ---------------------------------------------------------------------------

def check_splitting(s: SigmaSplitting, max_arity: int | None = None,
                    axioms: Sequence[str] = ("SPL", "INV", "COM")) -> AxiomReport:
    """Check SPL, INV and COM exactly on every tabulated basis element."""
    O = s.operad
    ring = O.ring
    A = O.max_arity if max_arity is None else min(max_arity, O.max_arity)
    rep = AxiomReport()
    sigs = {n: O.nonzero_signatures(n) for n in range(A + 1)}
    for n in range(A + 1):
        for c, d in sigs[n]:
            comp = O.component(c, d)
            for x in comp.all_labels():
                vx = {x: ring.one}
                images = {order: s.t(c, d, order, vx) for order in orders(n)}
                for order, tx in images.items():
                    rep.record("t is a chain map")
                    if not _eq(ring, comp.apply_d(tx), s.t(c, d, order, comp.apply_d(vx))):
                        rep.fail("t is a chain map", component=(c, d), order=order, label=x)
                        return rep
                if "SPL" in axioms:
                    rep.record("SPL")
                    if not _eq(ring, lvec_add(ring, *images.values()), vx):
                        rep.fail("SPL", component=(c, d), label=x)
                        return rep
                if "INV" in axioms:
                    for order, tx in images.items():
                        for sg in adjacent_transpositions(n):
                            inv = perm_inverse(sg)
                            new_order = tuple(inv[o] for o in order)
                            lhs = O.act(c, d, tx, sg)
                            rhs = s.t(act_on_colors(c, sg), d, new_order, O.act(c, d, vx, sg))
                            rep.record("INV")
                            if not _eq(ring, lhs, rhs):
                                rep.fail("INV", component=(c, d), order=order, perm=sg, label=x)
                                return rep
    if "COM" in axioms:
        _check_com(s, A, rep)
    return rep


def _maps_with_sizes(sizes):
    """All maps f: I -> J (tuples) whose fiber over j has size ``sizes[j]``."""
    n = sum(sizes)
    slots = []
    for j, z in enumerate(sizes):
        slots.extend([j] * z)
    return sorted(set(itertools.permutations(slots))) if n else [()]


def _check_com(s: SigmaSplitting, A: int, rep: AxiomReport):
    O = s.operad
    ring = O.ring
    for nu in range(1, A + 1):
        for cu, e in O.nonzero_signatures(nu):
            comp_u = O.component(cu, e)
            # u's inputs: J = first nj positions, K' = the rest (nonempty)
            for nj in range(0, nu):
                nk = nu - nj
                dJ, aK = cu[:nj], cu[nj:]
                # choose input arities for each j with |I| + |K| <= A
                for sizes in itertools.product(range(0, A - nk + 1), repeat=nj):
                    ni = sum(sizes)
                    if ni + nk > A:
                        continue
                    choices = []
                    for j in range(nj):
                        opts = [(b, y) for b in O.signatures_into(dJ[j], sizes[j])
                                for y in O.component(b, dJ[j]).all_labels()]
                        choices.append(opts)
                    if any(not o for o in choices):
                        continue
                    for f in _maps_with_sizes(sizes):
                        for phi in itertools.permutations(range(nk)):
                            for vs in itertools.product(*choices):
                                gcache: dict = {}
                                for u in comp_u.all_labels():
                                    _com_instance(s, rep, cu, e, nj, nk, f, phi, vs, u, gcache)
                                    if not rep.ok:
                                        return


def _com_instance(s, rep, cu, e, nj, nk, f, phi, vs, u, gcache):
    O = s.operad
    ring = O.ring
    ni = len(f)
    aK = cu[nj:]
    # inputs of u: J then K'; inputs of the composite: I then K, a[k] = a'[phi[k]]
    F = tuple(f) + tuple(nj + phi[k] for k in range(nk))
    inputs = [(b, {y: ring.one}) for b, y in vs]
    inputs += [((aK[k],), O.unit(aK[k])) for k in range(nk)]

    def gamma_label(z):
        got = gcache.get(z)
        if got is None:
            got = full_composition(O, cu, e, {z: ring.one}, inputs, F)
            gcache[z] = got
        return got

    def gamma(vec):
        out: dict = {}
        for z, w in vec.items():
            out = lvec_add(ring, out, gamma_label(z)[1], coeffs=(1, w))
        return out

    ctot, g = gamma_label(u)
    tsum = _min_sums(s, cu, e, nj, u)
    left = {k: gamma(tsum[phi[k]]) for k in range(nk)}
    right = {k: {} for k in range(nk)}
    for z, w in g.items():
        rz = _min_sums(s, ctot, e, ni, z)
        for k in range(nk):
            right[k] = lvec_add(ring, right[k], rz[k], coeffs=(1, w))
    for k in range(nk):
        rep.record("COM")
        if not _eq(ring, left[k], right[k]):
            rep.fail("COM", component=(cu, e), J=nj, f=f, phi=phi, k=k,
                     labels=(u,) + tuple(y for _, y in vs))
            return


def _min_sums(s: SigmaSplitting, c, d, start, x) -> list:
    """``[sum of t_order(x) over orders whose first input >= start is start + k]``."""
    key = ("min", c, d, start, x)
    got = s._cache.get(key)
    if got is None:
        ring = s.operad.ring
        n = len(c)
        got = [{} for _ in range(n - start)]
        vx = {x: ring.one}
        for order in orders(n):
            k = next(o for o in order if o >= start) - start
            got[k] = lvec_add(ring, got[k], s.t(c, d, order, vx))
        s._cache[key] = got
    return got


# ---------------------------------------------------------------------------
# the homotopy on a free algebra

class BadHomotopy(ValueError):
    pass


def _check_homotopy_data(V, alpha, h, ring):
    for col, cx in V.items():
        if cx.is_zero():
            continue
        a, hh = alpha[col], h[col]
        for k in cx.degrees():
            for lab in cx.labels(k):
                e = {lab: ring.one}
                if not _eq(ring, cx.apply_d(a.apply(e)), a.apply(cx.apply_d(e))):
                    raise BadHomotopy(f"alpha is not a chain map at color {col!r}, label {lab!r}")
                lhs = lvec_add(ring, cx.apply_d(hh.apply(e)), hh.apply(cx.apply_d(e)))
                rhs = lvec_add(ring, e, a.apply(e), coeffs=(1, -1))
                if not _eq(ring, lhs, rhs):
                    raise BadHomotopy(f"d h + h d != id - alpha at color {col!r}, label {lab!r}")


class FreeAlgebraHomotopy:
    """``H = pi o S o t`` on every component of a truncated free algebra.

    ``S_theta`` applies ``alpha`` to the inputs before position i in the
    theta-order, ``h`` at position i and the identity after it; moving ``h``
    past the operation and the preceding tensor factors gives the sign
    ``(-1)^(|x| + |w_0| + .. + |w_{j-1}|)`` where j is the input hit by h.
    """

    def __init__(self, s: SigmaSplitting, F, alpha: Mapping, h: Mapping, check: bool = True,
                 operation_sign: bool = True):
        if s.operad is not F.operad:
            raise ValueError("the splitting and the free algebra use different operads")
        self.split = s
        self.F = F
        self.ring = F.ring
        self.alpha = {col: alpha.get(col) for col in F.V}
        self.h = {col: h.get(col) for col in F.V}
        for col, cx in F.V.items():
            if cx.is_zero():
                continue
            if self.alpha[col] is None or self.h[col] is None:
                raise BadHomotopy(f"missing alpha or h at color {col!r}")
        if check:
            _check_homotopy_data(F.V, self.alpha, self.h, self.ring)
        self.operation_sign = operation_sign
        self._raw_cache: dict = {}

    def _image(self, maps, col, v) -> dict:
        return maps[col].image(v)

    def apply_raw_label(self, d, label) -> dict:
        key = (d, label)
        got = self._raw_cache.get(key)
        if got is not None:
            return got
        F, O, ring, s = self.F, self.F.operad, self.ring, self.split
        c, x, w = label
        n = len(c)
        xdeg = O.degree(c, d, x) if self.operation_sign else 0
        wdeg = [F.V[ci].degree_of(wi) for ci, wi in zip(c, w)]
        out: dict = {}
        for order in orders(n):
            tx = s.t_label(c, d, order, x)
            if not tx:
                continue
            for i in range(n):
                j = order[i]
                sign = -1 if (xdeg + sum(wdeg[:j])) % 2 else 1
                factors = []
                for p in range(n):
                    if p == j:
                        factors.append(self._image(self.h, c[p], w[p]))
                    elif p in order[:i]:
                        factors.append(self._image(self.alpha, c[p], w[p]))
                    else:
                        factors.append({w[p]: ring.one})
                if any(not f for f in factors):
                    continue
                for combo in itertools.product(*(f.items() for f in factors)):
                    coef = sign
                    for _, u in combo:
                        coef = coef * u
                    wt = tuple(g for g, _ in combo)
                    for z, v in tx.items():
                        k = (c, z, wt)
                        out[k] = out.get(k, 0) + coef * v
        got = {k: ring.norm(v) for k, v in out.items() if ring.norm(v)}
        self._raw_cache[key] = got
        return got

    def apply_raw(self, d, raw: Mapping) -> dict:
        out: dict = {}
        for lab, u in raw.items():
            for z, v in self.apply_raw_label(d, lab).items():
                out[z] = out.get(z, 0) + u * v
        return {z: self.ring.norm(v) for z, v in out.items() if self.ring.norm(v)}

    def apply(self, d, elem: Mapping) -> dict:
        """H on an element of ``F.complex(d)``."""
        return self.F.reduce(d, self.apply_raw(d, self.F.lift(d, elem)))

    def F_alpha(self, d, elem: Mapping) -> dict:
        F, ring = self.F, self.ring
        out: dict = {}
        for (c, x, w), u in F.lift(d, elem).items():
            factors = [self._image(self.alpha, ci, wi) for ci, wi in zip(c, w)]
            if any(not f for f in factors):
                continue
            for combo in itertools.product(*(f.items() for f in factors)):
                coef = u
                for _, v in combo:
                    coef = coef * v
                key = (c, x, tuple(g for g, _ in combo))
                out[key] = out.get(key, 0) + coef
        return F.reduce(d, out)

    def check_identity(self, arities: Sequence[int] | None = None) -> AxiomReport:
        """``d H + H d = id - F(alpha)`` on every basis element of every component."""
        F, ring = self.F, self.ring
        rep = AxiomReport()
        arities = range(F.N + 1) if arities is None else arities
        for d in F.operad.colors:
            cx = F.complex(d)
            for n in arities:
                comp = F.component(d, n)
                for lab in comp.all_labels():
                    e = {lab: ring.one}
                    lhs = lvec_add(ring, cx.apply_d(self.apply(d, e)), self.apply(d, cx.apply_d(e)))
                    rhs = lvec_add(ring, e, self.F_alpha(d, e), coeffs=(1, -1))
                    rep.record("dH + Hd = id - F(alpha)")
                    if not _eq(ring, lhs, rhs):
                        rep.fail("dH + Hd = id - F(alpha)", color=d, arity=n, label=lab)
                        return rep
        return rep

    def check_descent(self) -> AxiomReport:
        """H computed before and after the coinvariant projection agree."""
        F, ring = self.F, self.ring
        rep = AxiomReport()
        for d in F.operad.colors:
            for n in range(F.N + 1):
                raw = F.part(d, n)[0]
                for lab in raw.all_labels():
                    for g in F._stabilizer_gens(lab[0]):
                        # a permuted representative of the same class
                        c, x, w = lab
                        sign = koszul_sign([F.V[ci].degree_of(wi) for ci, wi in zip(c, w)], g)
                        wg = act_on_colors(w, g)
                        other = {(c, z, wg): ring.norm(sign * v)
                                 for z, v in F.operad.act_label(c, d, x, g).items()}
                        lhs = F.reduce(d, self.apply_raw(d, other))
                        rhs = self.apply(d, F.reduce(d, {lab: ring.one}))
                        rep.record("H descends to coinvariants")
                        if not _eq(ring, lhs, rhs):
                            rep.fail("H descends to coinvariants", color=d, label=lab, perm=g)
                            return rep
        return rep


def free_algebra_homotopy(s: SigmaSplitting, V: Mapping, alpha: Mapping, h: Mapping,
                          N: int) -> FreeAlgebraHomotopy:
    from opforge.algebras import free_algebra
    return FreeAlgebraHomotopy(s, free_algebra(s.operad, V, N), alpha, h)


def contraction_data(V: Mapping, contract: Mapping | None = None):
    """``(alpha, h)`` with alpha = id except on the colors listed in ``contract``.

    ``contract[color] = [(x, dx), ..]`` pairs generating cone summands; alpha
    kills them and h sends dx to x.
    """
    from opforge.complexes import GradedMap
    contract = contract or {}
    alpha, h = {}, {}
    for col, cx in V.items():
        ring = cx.ring
        pairs = contract.get(col, [])
        killed = {l for p in pairs for l in p}
        hmap = {dx: {x: ring.one} for x, dx in pairs}
        alpha[col] = GradedMap.from_function(
            cx, cx, 0, lambda l, killed=killed, ring=ring: {} if l in killed else {l: ring.one})
        h[col] = GradedMap.from_function(cx, cx, -1, lambda l, hmap=hmap: hmap.get(l, {}))
    return alpha, h


# ---------------------------------------------------------------------------
# ideal stability

def ideal_stability_check(s: SigmaSplitting, A, color, degree: int, N: int | None = None,
                          labels=("x", "dx")) -> AxiomReport:
    """With ``A' = A ⊕ Cone(id)[degree]`` at ``color``, check that the homotopy
    on ``F(A')`` preserves the ideal J generated by ``ker(F(A) -> A)``, and that
    on the spanning expressions ``mu(u; delta, letters)`` it equals the closed form
    ``sum_theta mu(t_theta(u); delta, .., h at the first cone letter in theta, ..)``.
    """
    from opforge.algebras import as_presentation, free_algebra, ideal_closure
    from opforge.complexes import cone_of_identity, direct_sum, DgComplex
    from opforge.exactlin import Matrix, kernel_basis, solve

    O, ring = s.operad, s.operad.ring
    A = as_presentation(A)
    N = A.N if N is None else N
    rep = AxiomReport()
    cone = cone_of_identity(ring, degree, labels=labels)
    Vp = {}
    for col in O.colors:
        parts = [A.complex(col)] + ([cone] if col == color else [])
        tags = ["A"] + (["H"] if col == color else [])
        Vp[col] = direct_sum(*parts, tags=tags)
    Fp = free_algebra(O, Vp, N)
    FA = free_algebra(O, {col: A.complex(col) for col in O.colors}, N)

    # I = ker(F(A) -> A), transported into F(A')
    gens = []
    for e in O.colors:
        src = FA.complex(e)
        tgt = A.complex(e)
        for k in src.degrees():
            cols = []
            for lab in src.labels(k):
                c, x, w = lab
                val = A.mu(c, e, {x: ring.one}, [{wi: ring.one} for wi in w])
                val = {z: v for z, v in val.items() if tgt.has_label(z)}
                cols.append(tgt.to_coords(k, val) if val else {})
            m = Matrix.from_columns(ring, tgt.dim(k), cols)
            ker = kernel_basis(m)
            for col_vec in ker.columns():
                delta = src.from_coords(k, col_vec)
                gens.append((e, delta))
    J = ideal_closure(Fp, [(e, FA.relabel_generators(Fp, e, v, lambda c, g: ("A", g)))
                           for e, v in gens])
    alpha, h = contraction_data(Vp, {color: [(("H", labels[0]), ("H", labels[1]))]})
    H = FreeAlgebraHomotopy(s, Fp, alpha, h)

    # H(J) in J
    for e in O.colors:
        cx = Fp.complex(e)
        vecs = J.vectors(e)
        by_deg: dict = {}
        for v in vecs:
            for k, piece in cx.split_by_degree(v).items():
                by_deg.setdefault(k, []).append(cx.to_coords(k, piece))
        mats = {k: Matrix.from_columns(ring, cx.dim(k), cs) for k, cs in by_deg.items()}
        for v in vecs:
            hv = H.apply(e, v)
            rep.record("H(J) ⊆ J")
            for k, piece in cx.split_by_degree(hv).items():
                if k not in mats or solve(mats[k], cx.to_coords(k, piece)) is None:
                    rep.fail("H(J) ⊆ J", color=e, element=v)
                    return rep

    # the closed form on spanning expressions
    letters = {col: list(Vp[col].all_labels()) for col in O.colors}
    for cd, delta in gens:
        draw = FA.lift(cd, delta)
        draw = {(c, x, tuple(("A", g) for g in w)): u for (c, x, w), u in draw.items()}
        ddeg = next(FA.complex(cd).degree_of(l) for l in delta)
        lo = min(len(l[0]) for l in draw)
        for m in range(1, N - lo + 2):
            if m > O.max_arity:
                break
            for c, e in O.nonzero_signatures(m):
                if c[0] != cd or any(not letters[ci] for ci in c[1:]):
                    continue
                for gs in itertools.product(*(letters[ci] for ci in c[1:])):
                    if not any(g[0] == "H" for g in gs):
                        continue
                    others = [{((ci,), z, (g,)): v for z, v in O.unit(ci).items()}
                              for ci, g in zip(c[1:], gs)]
                    gdeg = [Vp[ci].degree_of(g) for ci, g in zip(c[1:], gs)]
                    for u in O.component(c, e).all_labels():
                        expr = Fp.reduce(e, Fp.mu_raw(c, e, {u: ring.one}, [draw] + others))
                        if not expr:
                            continue
                        lhs = H.apply(e, expr)
                        udeg = O.degree(c, e, u)
                        rhs: dict = {}
                        for order in orders(m):
                            tu = s.t_label(c, e, order, u)
                            if not tu:
                                continue
                            first = next(p for p in order if p >= 1 and gs[p - 1][0] == "H")
                            hx = h[c[first]].image(gs[first - 1])
                            sign = -1 if (udeg + ddeg + sum(gdeg[:first - 1])) % 2 else 1
                            for hl, hv in hx.items():
                                new = list(others)
                                new[first - 1] = {((c[first],), z, (hl,)): v
                                                  for z, v in O.unit(c[first]).items()}
                                val = Fp.reduce(e, Fp.mu_raw(c, e, tu, [draw] + new))
                                rhs = lvec_add(ring, rhs, val, coeffs=(1, sign * hv))
                        rep.record("closed form")
                        if not _eq(ring, lhs, rhs):
                            rep.fail("closed form", component=(c, e), op=u, letters=gs)
                            return rep
    return rep
