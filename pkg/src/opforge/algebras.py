"""Algebras over colored dg operads, truncated by arity.

The free algebra on a family of complexes ``V`` has, at output color ``d``
and arity ``n``, the component ``sum_c O(c, d) (x)_{Stab(c)} V_{c_1} (x) ... (x) V_{c_n}``
over sorted color tuples ``c``.  Elements are written on *raw* labels
``(c, x, w)``: a color tuple, an operation label of ``O(c, d)`` and a tuple of
generator labels.  Any raw label, sorted or not, reduces to the quotient
through the identification ``(x . s) (x) w ~ x (x) s_*(w)`` with the Koszul sign.

Everything of arity above ``N`` is dropped; this is the quotient by an ideal,
so every identity checked here is an identity in an honest algebra.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

from opforge.complexes import (
    ChainMap, DgComplex, GradedMap, NotDClosed, cone_of_identity, direct_sum, homology,
    is_quasi_iso, lvec_add, quotient_by_subspace, tensor, tensor_many,
)
from opforge.exactlin import Matrix, Ring, image_basis, kernel_basis, rank, solve
from opforge.operads.base import (
    ArityOverflow, AxiomReport, ColoredDgOperad, OperadMap, _eq, _sort_key, act_on_colors,
    adjacent_transpositions, compose_colors, full_composition, perm_inverse, sort_perm,
)

__all__ = [
    "OperadAlgebra", "TruncatedFreeAlgebra", "AlgebraPresentation", "Ideal", "RestrictedAlgebra",
    "free_algebra", "ideal_closure", "quotient_algebra", "presentation", "initial_algebra",
    "restrict_along", "induce_along", "induction_unit", "coproduct_with_free", "truncate",
    "admissibility_probe", "ProbeReport", "check_algebra_axioms", "koszul_sign",
    "LaxPropAlgebra", "homotopy_prop_algebra_check", "DerivedTensorUnavailable",
    "format_monomial", "inclusion_into_coproduct", "as_presentation", "CONSISTENT", "FAILS",
]

CONSISTENT = "consistent"
FAILS = "FAILS"


class DerivedTensorUnavailable(ValueError):
    """Reserved: every complex here is degreewise free, so the plain tensor is derived."""


def koszul_sign(degs: Sequence[int], s: Sequence[int]) -> int:
    """Sign of reordering graded factors ``(z_0, .., z_{n-1})`` into ``(z_{s[0]}, ..)``."""
    sign = 1
    n = len(s)
    for i in range(n):
        if degs[s[i]] % 2 == 0:
            continue
        for j in range(i + 1, n):
            if s[i] > s[j] and degs[s[j]] % 2:
                sign = -sign
    return sign


def _superscript(k: int) -> str:
    table = str.maketrans("-0123456789", "⁻⁰¹²³⁴⁵⁶⁷⁸⁹")
    return str(k).translate(table)


def format_monomial(label, letter: Callable = str) -> str:
    """``x²``-style rendering of a raw label ``(c, x, w)`` by its generator letters."""
    if label[0] == "q":
        return repr(label)
    w = [letter(g) for g in label[2]]
    if not w:
        return "1"
    out, prev, count = [], None, 0
    for g in list(w) + [object()]:
        if g == prev:
            count += 1
            continue
        if prev is not None:
            out.append(prev + (_superscript(count) if count > 1 else ""))
        prev, count = g, 1
    return "·".join(out)


def _sorted_colors(colors) -> list:
    return sorted(colors, key=_sort_key)


def _label_arity(label) -> int:
    return label[1] if label[0] == "q" else len(label[0])


def _lift_map(cx: DgComplex, qcx: DgComplex, proj: ChainMap) -> Callable:
    """A section of ``proj`` on basis labels (identity on surviving labels)."""
    cache: dict = {}
    ring = cx.ring

    def lift(lab):
        got = cache.get(lab)
        if got is None:
            if cx.has_label(lab):
                got = {lab: ring.one}
            else:
                k = qcx.degree_of(lab)
                sol = solve(proj.block(k), {qcx.index(k, lab): ring.one})
                got = cx.from_coords(k, sol)
            cache[lab] = got
        return got

    return lift


def _apply_labelwise(fn: Callable, vec: Mapping, ring: Ring) -> dict:
    out: dict = {}
    for lab, u in vec.items():
        for z, v in fn(lab).items():
            out[z] = out.get(z, 0) + u * v
    return {z: ring.norm(w) for z, w in out.items() if ring.norm(w)}


class OperadAlgebra:
    """Interface: ``complex(d)`` and ``mu(c, d, xvec, elems)``."""

    operad: ColoredDgOperad
    ring: Ring
    N: int

    @property
    def colors(self):
        return self.operad.colors

    def complex(self, d) -> DgComplex:
        raise NotImplementedError

    def mu(self, c, d, xvec: Mapping, elems: Sequence[Mapping]) -> dict:
        raise NotImplementedError

    def d(self, color, elem: Mapping) -> dict:
        return self.complex(color).apply_d(elem)

    def total_rank(self) -> int:
        return sum(self.complex(c).total_rank() for c in self.colors)


# ---------------------------------------------------------------------------
# free algebras

class TruncatedFreeAlgebra(OperadAlgebra):
    def __init__(self, operad: ColoredDgOperad, V: Mapping[Hashable, DgComplex], N: int):
        if N > operad.max_arity:
            raise ArityOverflow(f"truncation {N} exceeds the operad's arity bound {operad.max_arity}")
        self.operad = operad
        self.ring = operad.ring
        self.N = N
        self.V = {c: V[c] if c in V else DgComplex(operad.ring, {}) for c in operad.colors}
        for c, x in self.V.items():
            if x.ring != self.ring:
                raise ValueError(f"generator complex at {c!r} is over {x.ring}, not {self.ring}")
        self._parts: dict = {}
        self._complexes: dict = {}
        self._reduce_cache: dict = {}

    # -- components ------------------------------------------------------------
    def sorted_tuples(self, n: int):
        cols = [c for c in _sorted_colors(self.operad.colors) if not self.V[c].is_zero()]
        return itertools.combinations_with_replacement(cols, n)

    def part(self, d, n: int):
        """``(raw complex, projection, quotient complex, lift)`` at color d, arity n."""
        key = (d, n)
        got = self._parts.get(key)
        if got is not None:
            return got
        O, ring = self.operad, self.ring
        pieces, tags = [], []
        for c in self.sorted_tuples(n):
            oc = O.component(c, d)
            if oc.is_zero():
                continue
            pieces.append(tensor_many([oc] + [self.V[ci] for ci in c], ring))
            tags.append(c)
        if pieces:
            raw = direct_sum(*pieces, tags=tags).relabel(lambda l: (l[0], l[1][0], tuple(l[1][1:])))
        else:
            raw = DgComplex(ring, {})
        span: dict = {}
        for k in raw.degrees():
            vecs = []
            for lab in raw.labels(k):
                for g in self._stabilizer_gens(lab[0]):
                    rel = self._relation(d, lab, g)
                    if rel:
                        vecs.append(rel)
            span[k] = vecs
        q, proj = quotient_by_subspace(
            raw, span, labels=lambda l: ("q", n) + tuple(l[1:]) if l[0] == "q" else l)
        got = (raw, proj, q, _lift_map(raw, q, proj))
        self._parts[key] = got
        return got

    @staticmethod
    def _stabilizer_gens(c):
        out = []
        for k in range(len(c) - 1):
            if c[k] == c[k + 1]:
                t = list(range(len(c)))
                t[k], t[k + 1] = k + 1, k
                out.append(tuple(t))
        return out

    def _relation(self, d, lab, s) -> dict:
        c, x, w = lab
        ring = self.ring
        sign = koszul_sign(self._wdegs(c, w), s)
        out = {lab: ring.one}
        ws = act_on_colors(w, s)
        for z, v in self.operad.act_label(c, d, x, s).items():
            key = (c, z, ws)
            out[key] = ring.norm(out.get(key, 0) - sign * v)
        return {k: v for k, v in out.items() if v}

    def _wdegs(self, c, w):
        return [self.V[ci].degree_of(wi) for ci, wi in zip(c, w)]

    def component(self, d, n: int) -> DgComplex:
        return self.part(d, n)[2]

    def complex(self, d) -> DgComplex:
        got = self._complexes.get(d)
        if got is None:
            parts = [self.component(d, n) for n in range(self.N + 1)]
            got = direct_sum(*parts).relabel(lambda l: l[1])
            self._complexes[d] = got
        return got

    def arity_ranks(self, d) -> list[int]:
        return [self.component(d, n).total_rank() for n in range(self.N + 1)]

    def arity_of(self, label) -> int:
        return _label_arity(label)

    # -- normal forms ----------------------------------------------------------
    def normalize_label(self, d, label) -> dict:
        """Rewrite a raw label with any color order on sorted raw labels."""
        c, y, w = label
        s = sort_perm(c)
        if list(s) == list(range(len(c))):
            return {label: self.ring.one}
        sign = koszul_sign(self._wdegs(c, w), s)
        cs, ws = act_on_colors(c, s), act_on_colors(w, s)
        return {(cs, z, ws): self.ring.norm(sign * v)
                for z, v in self.operad.act_label(c, d, y, s).items()}

    def reduce(self, d, raw: Mapping) -> dict:
        """Normal form in ``complex(d)`` of a raw vector; arity above N is dropped."""
        ring = self.ring
        out: dict = {}
        for lab, u in raw.items():
            for z, v in self._reduce_label(d, lab).items():
                out[z] = out.get(z, 0) + u * v
        return {z: ring.norm(w) for z, w in out.items() if ring.norm(w)}

    def _reduce_label(self, d, lab) -> dict:
        key = (d, lab)
        got = self._reduce_cache.get(key)
        if got is not None:
            return got
        n = len(lab[0])
        if n > self.N:
            got = {}
        else:
            raw, proj, q, _ = self.part(d, n)
            got = {}
            for sl, u in self.normalize_label(d, lab).items():
                if not raw.has_label(sl):
                    continue  # the operation or a generator vanishes
                k = raw.degree_of(sl)
                col = proj.block(k).column(raw.index(k, sl))
                for i, v in col.items():
                    z = q.labels(k)[i]
                    got[z] = got.get(z, 0) + u * v
            got = {z: self.ring.norm(v) for z, v in got.items() if self.ring.norm(v)}
        self._reduce_cache[key] = got
        return got

    def lift(self, d, elem: Mapping) -> dict:
        """A raw representative (sorted labels) of an element of ``complex(d)``."""
        out: dict = {}
        ring = self.ring
        for lab, u in elem.items():
            n = _label_arity(lab)
            for z, v in self.part(d, n)[3](lab).items():
                out[z] = out.get(z, 0) + u * v
        return {z: ring.norm(w) for z, w in out.items() if ring.norm(w)}

    def generator(self, color, vlabel) -> dict:
        unit = self.operad.unit(color)
        return self.reduce(color, {((color,), x, (vlabel,)): u for x, u in unit.items()})

    def operation(self, c, d, xvec: Mapping) -> dict:
        """The element ``mu(x; g_1, ..)`` needs inputs; this is ``x`` applied to nothing (arity 0)."""
        if c:
            raise ValueError("operation() only embeds nullary operations")
        return self.reduce(d, {((), x, ()): u for x, u in xvec.items()})

    # -- structure -------------------------------------------------------------
    def mu_raw(self, c, d, xvec: Mapping, raws: Sequence[Mapping]) -> dict:
        """``mu(x; r_1, ..)`` on raw inputs; result raw (unsorted labels)."""
        O, ring = self.operad, self.ring
        c = tuple(c)
        out: dict = {}
        supports = [list(r.items()) for r in raws]
        for x, ux in xvec.items():
            for combo in itertools.product(*supports):
                coef = ux
                for _, u in combo:
                    coef = coef * u
                total = sum(len(lab[0]) for lab, _ in combo)
                if total > self.N:
                    continue
                sign, wdeg = 1, 0
                inputs = []
                for j, ((ci, yi, wi), _) in enumerate(combo):
                    ydeg = O.degree(ci, c[j], yi)
                    if ydeg % 2 and wdeg % 2:
                        sign = -sign
                    wdeg += sum(self._wdegs(ci, wi))
                    inputs.append((ci, {yi: ring.one}))
                cols, vec = full_composition(O, c, d, {x: ring.one}, inputs)
                w = tuple(g for (ci, yi, wi), _ in combo for g in wi)
                for z, v in vec.items():
                    key = (cols, z, w)
                    out[key] = out.get(key, 0) + sign * coef * v
        return {z: ring.norm(v) for z, v in out.items() if ring.norm(v)}

    def mu(self, c, d, xvec: Mapping, elems: Sequence[Mapping]) -> dict:
        c = tuple(c)
        if len(elems) != len(c):
            raise ValueError("one input element per slot is required")
        raws = [self.lift(ci, e) for ci, e in zip(c, elems)]
        return self.reduce(d, self.mu_raw(c, d, xvec, raws))

    def relabel_generators(self, target: "TruncatedFreeAlgebra", d, elem: Mapping,
                           fn: Callable, op_map: Callable | None = None,
                           color_map: Callable | None = None) -> dict:
        """Transport an element along ``v -> fn(color, v)`` on generators (and an
        optional operad map ``op_map(c, d, x) -> vec``)."""
        ring = self.ring
        cm = color_map or (lambda z: z)
        raw = self.lift(d, elem)
        out: dict = {}
        for (c, x, w), u in raw.items():
            w2 = tuple(fn(ci, wi) for ci, wi in zip(c, w))
            xs = op_map(c, d, x) if op_map else {x: ring.one}
            c2 = tuple(cm(ci) for ci in c)
            for z, v in xs.items():
                key = (c2, z, w2)
                out[key] = out.get(key, 0) + u * v
        return target.reduce(cm(d), {k: ring.norm(v) for k, v in out.items() if ring.norm(v)})

    def __repr__(self):
        return f"F_{self.operad.name}(N={self.N})"


def free_algebra(O: ColoredDgOperad, V: Mapping[Hashable, DgComplex], N: int) -> TruncatedFreeAlgebra:
    return TruncatedFreeAlgebra(O, V, N)


# ---------------------------------------------------------------------------
# ideals and presentations

@dataclass
class Ideal:
    """Spanning vectors per color, as elements of the free algebra."""
    spans: dict
    generators: list = field(default_factory=list)

    def vectors(self, color) -> list:
        return self.spans.get(color, [])

    def is_zero(self) -> bool:
        return not any(self.spans.values())


def ideal_closure(F: TruncatedFreeAlgebra, generators: Sequence[tuple]) -> Ideal:
    """The d-closed ideal generated by ``[(color, element)]``.

    It is spanned by ``mu(x; r, g_2, .., g_m)`` for r among the generators and
    their differentials, x any basis operation with first input of r's color
    and g_i generator letters; the first slot suffices by equivariance.
    """
    O, ring = F.operad, F.ring
    gens = []
    for col, r in generators:
        r = dict(r)
        if not r:
            continue
        gens.append((col, r))
        dr = F.d(col, r)
        if dr:
            gens.append((col, dr))
    spans: dict = {d: [] for d in O.colors}
    letters = {c: list(F.V[c].all_labels()) for c in O.colors}
    for col, r in gens:
        raw = F.lift(col, r)
        lo = min(len(lab[0]) for lab in raw)
        for m in range(1, F.N - lo + 2):
            if m > O.max_arity:
                break
            for c, d in O.nonzero_signatures(m):
                if c[0] != col:
                    continue
                if any(not letters[ci] for ci in c[1:]):
                    continue
                for gs in itertools.product(*(letters[ci] for ci in c[1:])):
                    others = [{((ci,), u, (g,)): v for u, v in O.unit(ci).items()}
                              for ci, g in zip(c[1:], gs)]
                    for x in O.component(c, d).all_labels():
                        vec = F.reduce(d, F.mu_raw(c, d, {x: ring.one}, [raw] + others))
                        if vec:
                            spans[d].append(vec)
        spans[col].append(F.reduce(col, raw))
    spans = {d: [v for v in vs if v] for d, vs in spans.items()}
    return Ideal(spans, list(generators))


class AlgebraPresentation(OperadAlgebra):
    """``F / I`` with I a d-closed ideal of the truncated free algebra F."""

    def __init__(self, free: TruncatedFreeAlgebra, ideal: Ideal):
        self.free = free
        self.operad = free.operad
        self.ring = free.ring
        self.N = free.N
        self.ideal = ideal
        self._q: dict = {}

    @property
    def V(self):
        return self.free.V

    @property
    def relations(self) -> list:
        return list(self.ideal.generators)

    def _quotient(self, d):
        got = self._q.get(d)
        if got is None:
            cx = self.free.complex(d)
            span: dict = {}
            for v in self.ideal.vectors(d):
                for k, piece in cx.split_by_degree(v).items():
                    span.setdefault(k, []).append(piece)
            q, proj = quotient_by_subspace(
                cx, span, labels=lambda l: ("Q",) + tuple(l[1:]) if l[0] == "q" else l)
            got = (q, proj, _lift_map(cx, q, proj))
            self._q[d] = got
        return got

    def complex(self, d) -> DgComplex:
        return self._quotient(d)[0]

    def projection(self, d) -> ChainMap:
        return self._quotient(d)[1]

    def project(self, d, free_elem: Mapping) -> dict:
        q, proj, _ = self._quotient(d)
        cx = self.free.complex(d)
        out: dict = {}
        for k, piece in cx.split_by_degree(free_elem).items():
            out.update(q.from_coords(k, proj.block(k).apply(cx.to_coords(k, piece))))
        return out

    def lift(self, d, elem: Mapping) -> dict:
        return _apply_labelwise(self._quotient(d)[2], elem, self.ring)

    def reduce(self, d, raw: Mapping) -> dict:
        return self.project(d, self.free.reduce(d, raw))

    def generator(self, color, vlabel) -> dict:
        return self.project(color, self.free.generator(color, vlabel))

    def mu(self, c, d, xvec, elems) -> dict:
        lifted = [self.lift(ci, e) for ci, e in zip(tuple(c), elems)]
        return self.project(d, self.free.mu(c, d, xvec, lifted))

    def is_graded(self) -> bool:
        """Whether the ideal is spanned by arity-homogeneous vectors."""
        return all(len({_label_arity(l) for l in v}) <= 1
                   for vs in self.ideal.spans.values() for v in vs)

    def arity_ranks(self, d) -> list[int]:
        if not self.is_graded():
            raise ValueError("the ideal is not arity-graded")
        F = self.free
        out = []
        for n in range(self.N + 1):
            comp = F.component(d, n)
            vecs = [v for v in self.ideal.vectors(d) if v and _label_arity(next(iter(v))) == n]
            r = 0
            for k in comp.degrees():
                cols = []
                for v in vecs:
                    piece = {l: u for l, u in v.items() if comp.has_label(l) and comp.degree_of(l) == k}
                    if piece:
                        cols.append(comp.to_coords(k, piece))
                if cols:
                    r += rank(Matrix.from_columns(self.ring, comp.dim(k), cols))
            out.append(comp.total_rank() - r)
        return out

    def arity_part(self, d, n: int) -> tuple[DgComplex, list]:
        """Subcomplex spanned by surviving labels of arity n (graded ideals only)."""
        if not self.is_graded():
            raise ValueError("the ideal is not arity-graded")
        q = self.complex(d)
        keep = {k: [l for l in q.labels(k) if l[0] != "Q" and _label_arity(l) == n] for k in q.degrees()}
        if any(l[0] == "Q" for k in q.degrees() for l in q.labels(k)):
            raise ValueError("quotient labels do not carry arities")
        return _subcomplex(q, keep), keep

    def __repr__(self):
        return f"{self.free!r}/({len(self.ideal.generators)} relations)"


def _subcomplex(q: DgComplex, keep: Mapping) -> DgComplex:
    ring = q.ring
    basis = {k: list(v) for k, v in keep.items() if v}
    diff = {}
    for k, labs in basis.items():
        if k + 1 not in basis:
            continue
        idx = [q.index(k, l) for l in labs]
        tgt = [q.index(k + 1, l) for l in basis[k + 1]]
        dm = q.d(k)
        m = Matrix.from_columns(ring, len(tgt), [
            {r: dm[t, i] for r, t in enumerate(tgt) if dm[t, i]} for i in idx])
        if not m.is_zero():
            diff[k] = m
    return DgComplex(ring, basis, diff)


def quotient_algebra(F: TruncatedFreeAlgebra, ideal: Ideal) -> AlgebraPresentation:
    """``F / ideal``; raises :class:`NotDClosed` unless the ideal is d-closed."""
    A = AlgebraPresentation(F, ideal)
    for d in F.operad.colors:
        if ideal.vectors(d):
            A.complex(d)
    return A


def presentation(O: ColoredDgOperad, V: Mapping, relations: Sequence[tuple], N: int) -> AlgebraPresentation:
    """``F_O(V) / (relations)`` at truncation N; relations are ``(color, raw vector)``."""
    F = free_algebra(O, V, N)
    rels = [(col, F.reduce(col, raw)) for col, raw in relations]
    return quotient_algebra(F, ideal_closure(F, rels))


def initial_algebra(O: ColoredDgOperad, N: int) -> AlgebraPresentation:
    F = free_algebra(O, {}, N)
    return quotient_algebra(F, Ideal({d: [] for d in O.colors}))


def as_presentation(A: OperadAlgebra) -> AlgebraPresentation:
    if isinstance(A, AlgebraPresentation):
        return A
    if isinstance(A, TruncatedFreeAlgebra):
        return quotient_algebra(A, Ideal({d: [] for d in A.operad.colors}))
    raise TypeError(f"expected a presented algebra, got {type(A).__name__}")


def truncate(A: OperadAlgebra, N: int) -> AlgebraPresentation:
    """Quotient by everything of arity above N (N not above A's truncation)."""
    A = as_presentation(A)
    F = A.free
    extra = []
    for d in A.operad.colors:
        for lab in F.complex(d).all_labels():
            if _label_arity(lab) > N:
                extra.append((d, {lab: A.ring.one}))
    return quotient_algebra(F, ideal_closure(F, A.relations + extra))


# ---------------------------------------------------------------------------
# change of operad, coproducts

class RestrictedAlgebra(OperadAlgebra):
    """``f^* B``: the same complexes, structure precomposed with f."""

    def __init__(self, f: OperadMap, B: OperadAlgebra):
        self.map = f
        self.base = B
        self.operad = f.source
        self.ring = B.ring
        self.N = B.N

    def complex(self, d) -> DgComplex:
        return self.base.complex(self.map.color_map[d])

    def mu(self, c, d, xvec, elems) -> dict:
        f = self.map
        return self.base.mu(f.image_colors(c), f.color_map[d], f.apply(tuple(c), d, xvec), elems)


def restrict_along(f: OperadMap, B: OperadAlgebra) -> RestrictedAlgebra:
    return RestrictedAlgebra(f, B)


def _pushforward(f: OperadMap, V: Mapping) -> dict:
    ring = f.target.ring
    out = {}
    for q in f.target.colors:
        pieces = [(p, V[p]) for p in f.source.colors if f.color_map[p] == q and p in V]
        pieces = [(p, x) for p, x in pieces if not x.is_zero()]
        out[q] = direct_sum(*[x for _, x in pieces], tags=[p for p, _ in pieces]) if pieces \
            else DgComplex(ring, {})
    return out


def induce_along(f: OperadMap, A: OperadAlgebra, N: int | None = None) -> AlgebraPresentation:
    """``f_! A = F_Q(f_* V) / (f_* relations)``."""
    A = as_presentation(A)
    N = A.N if N is None else N
    FQ = free_algebra(f.target, _pushforward(f, A.V), N)
    rels = []
    for col, r in A.relations:
        rels.append((f.color_map[col], A.free.relabel_generators(
            FQ, col, r, lambda c, v: (c, v), op_map=f.apply_label,
            color_map=lambda z: f.color_map[z])))
    return quotient_algebra(FQ, ideal_closure(FQ, rels))


def induction_unit(f: OperadMap, A: OperadAlgebra, B: AlgebraPresentation) -> dict:
    """``A -> f^* f_! A`` per source color, as chain maps; raises if it does not descend."""
    A = as_presentation(A)
    ring = A.ring
    out = {}
    for p in f.source.colors:
        q = f.color_map[p]

        def img(lab, p=p):
            raw = A.lift(p, {lab: ring.one})
            return B.project(q, A.free.relabel_generators(
                B.free, p, raw, lambda c, v: (c, v), op_map=f.apply_label,
                color_map=lambda z: f.color_map[z]))

        out[p] = ChainMap.from_function(A.complex(p), B.complex(q), img)
    # the map is well defined: relations go to zero
    for col, r in A.relations:
        img = B.project(f.color_map[col], A.free.relabel_generators(
            B.free, col, r, lambda c, v: (c, v), op_map=f.apply_label,
            color_map=lambda z: f.color_map[z]))
        if img:
            raise ValueError(f"relation at {col!r} does not vanish in the induced algebra")
    return out


def coproduct_with_free(A: OperadAlgebra, M: Mapping[Hashable, DgComplex], N: int | None = None,
                        tags=("u", "m")) -> AlgebraPresentation:
    """``A ⊔ F(M) = F(U ⊕ M) / (relations of A)``; generator labels become (tag, label)."""
    A = as_presentation(A)
    N = A.N if N is None else N
    ring = A.ring
    V = {}
    for c in A.operad.colors:
        u = A.V.get(c, DgComplex(ring, {}))
        m = M.get(c, DgComplex(ring, {}))
        V[c] = direct_sum(u, m, tags=tags)
    F = free_algebra(A.operad, V, N)
    rels = [(col, A.free.relabel_generators(F, col, r, lambda c, v: (tags[0], v)))
            for col, r in A.relations]
    return quotient_algebra(F, ideal_closure(F, rels))


def inclusion_into_coproduct(A: OperadAlgebra, B: AlgebraPresentation, tag="u") -> dict:
    """``A -> A ⊔ F(M)`` per color."""
    A = as_presentation(A)
    ring = A.ring
    out = {}
    for d in A.operad.colors:
        def img(lab, d=d):
            raw = A.lift(d, {lab: ring.one})
            return B.project(d, A.free.relabel_generators(B.free, d, raw, lambda c, v: (tag, v)))
        out[d] = ChainMap.from_function(A.complex(d), B.complex(d), img)
    return out


# ---------------------------------------------------------------------------
# admissibility probe

@dataclass
class ProbeReport:
    verdict: str
    witness: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == CONSISTENT

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return f"{CONSISTENT} (checked {self.details.get('checked', 0)} blocks)"
        return f"{FAILS}: {self.witness}"


def admissibility_probe(O: ColoredDgOperad, A: OperadAlgebra | None, color, degree: int,
                        N: int, labels=("x", "dx")) -> ProbeReport:
    """Is ``A -> A ⊔ F(Cone(id)[degree] at color)`` a quasi-isomorphism at truncation N?

    A failure is conclusive; "consistent" is evidence only.
    """
    A = initial_algebra(O, N) if A is None else as_presentation(A)
    M = {color: cone_of_identity(O.ring, degree, labels=labels)}
    B = coproduct_with_free(A, M, N)
    inc = inclusion_into_coproduct(A, B)
    checked = 0
    graded = A.is_graded() and B.is_graded()
    for d in O.colors:
        f = inc[d]
        if not graded:
            res = is_quasi_iso(f)
            checked += 1
            if not res.ok:
                return ProbeReport(FAILS, f"H{_superscript(res.witness_degree)} differs at color {d!r}",
                                   {"color": d, "degree": res.witness_degree, "checked": checked})
            continue
        for n in range(N + 1):
            try:
                src, _ = A.arity_part(d, n)
                tgt, _ = B.arity_part(d, n)
            except ValueError:
                res = is_quasi_iso(f)
                checked += 1
                if not res.ok:
                    return ProbeReport(FAILS, f"H{_superscript(res.witness_degree)} differs at color {d!r}",
                                       {"color": d, "degree": res.witness_degree})
                break
            g = ChainMap.from_function(src, tgt, lambda l, f=f: {
                z: v for z, v in f.apply({l: O.ring.one}).items() if tgt.has_label(z)}, check=False)
            res = is_quasi_iso(g)
            checked += 1
            if not res.ok:
                k = res.witness_degree
                rep = _class_witness(g, k)
                mono = format_monomial(rep, lambda g: str(g[1])) if rep is not None else "?"
                return ProbeReport(
                    FAILS, f"nonzero H{_superscript(k)} class {mono} in the arity-{n} component",
                    {"color": d, "degree": k, "arity": n, "representative": rep, "checked": checked})
    return ProbeReport(CONSISTENT, None, {"checked": checked})


def _class_witness(g: ChainMap, k: int):
    """A cycle label of the target whose class is missed by g in degree k, if any."""
    tgt, src = g.target, g.source
    ring = tgt.ring
    zt = kernel_basis(tgt.d(k)) if tgt.dim(k) else None
    if zt is None or zt.cols == 0:
        return None
    spans = []
    if tgt.dim(k - 1) and k - 1 in tgt.degrees():
        spans.extend(tgt.d(k - 1).columns())
    if src.dim(k):
        zs = kernel_basis(src.d(k))
        gk = g.block(k)
        spans.extend((gk @ zs).columns())
    base = [c for c in spans if c]
    r0 = rank(Matrix.from_columns(ring, tgt.dim(k), base)) if base else 0
    best = None
    for col in zt.columns():
        m = Matrix.from_columns(ring, tgt.dim(k), base + [col])
        if rank(m) > r0:
            labs = [tgt.labels(k)[i] for i in sorted(col)]
            cand = min(labs, key=lambda l: (len(l[2]) if l[0] != "q" else 0, repr(l)))
            if best is None or len(col) < best[0]:
                best = (len(col), cand)
    return best[1] if best else None


# ---------------------------------------------------------------------------
# algebra audit

def check_algebra_axioms(A: OperadAlgebra, max_op_arity: int | None = None,
                         max_checks: int | None = None) -> AxiomReport:
    """Leibniz rule, unit, equivariance and associativity on basis elements."""
    O, ring = A.operad, A.ring
    K = min(O.max_arity, A.N if max_op_arity is None else max_op_arity)
    rep = AxiomReport()
    basis = {c: list(A.complex(c).all_labels()) for c in O.colors}

    def deg(c, lab):
        return A.complex(c).degree_of(lab)

    for c in O.colors:
        for lab in basis[c]:
            rep.record("unit")
            if not _eq(ring, A.mu((c,), c, O.unit(c), [{lab: ring.one}]), {lab: ring.one}):
                rep.fail("unit", color=c, label=lab)
                return rep
    for n in range(0, K + 1):
        for c, d in O.nonzero_signatures(n):
            comp = O.component(c, d)
            for x in comp.all_labels():
                xd = comp.degree_of(x)
                for inputs in itertools.product(*(basis[ci] for ci in c)):
                    elems = [{l: ring.one} for l in inputs]
                    val = A.mu(c, d, {x: ring.one}, elems)
                    # Leibniz
                    lhs = A.d(d, val)
                    rhs = A.mu(c, d, comp.apply_d({x: ring.one}), elems)
                    acc = xd
                    for j, ci in enumerate(c):
                        de = A.d(ci, elems[j])
                        if de:
                            sgn = -1 if acc % 2 else 1
                            new = list(elems)
                            new[j] = de
                            rhs = lvec_add(ring, rhs, A.mu(c, d, {x: ring.one}, new), coeffs=(1, sgn))
                        acc += deg(ci, inputs[j])
                    rep.record("Leibniz")
                    if not _eq(ring, lhs, rhs):
                        rep.fail("Leibniz", component=(c, d), op=x, inputs=inputs)
                        return rep
                    # equivariance
                    degs = [deg(ci, l) for ci, l in zip(c, inputs)]
                    for s in adjacent_transpositions(n):
                        cs = act_on_colors(c, s)
                        lhs = A.mu(cs, d, O.act_label(c, d, x, s),
                                   [elems[k] for k in s])
                        rhs = {k: ring.norm(koszul_sign(degs, s) * v) for k, v in val.items()}
                        rep.record("equivariance")
                        if not _eq(ring, lhs, rhs):
                            rep.fail("equivariance", component=(c, d), op=x, perm=s, inputs=inputs)
                            return rep
                    if max_checks and rep.counts.get("Leibniz", 0) >= max_checks:
                        break
    # associativity: mu(x; .., mu(y; b..), ..) = sign * mu(x o_i y; .., b.., ..)
    for n in range(1, K + 1):
        for c, d in O.nonzero_signatures(n):
            for i in range(n):
                for m in range(0, K - n + 2):
                    for b in O.signatures_into(c[i], m):
                        for x in O.component(c, d).all_labels():
                            for y in O.component(b, c[i]).all_labels():
                                ydeg = O.degree(b, c[i], y)
                                xy = O.compose(c, d, i, {x: ring.one}, b, {y: ring.one})
                                cb = compose_colors(c, i, b)
                                outer = [basis[c[j]] for j in range(n) if j != i]
                                inner = [basis[bj] for bj in b]
                                for os_ in itertools.product(*outer):
                                    for ins in itertools.product(*inner):
                                        pre = list(os_[:i])
                                        post = list(os_[i:])
                                        pre_deg = sum(deg(c[j], l) for j, l in enumerate(pre))
                                        inner_val = A.mu(b, c[i], {y: ring.one},
                                                         [{l: ring.one} for l in ins])
                                        lhs = A.mu(c, d, {x: ring.one},
                                                   [{l: ring.one} for l in pre] + [inner_val]
                                                   + [{l: ring.one} for l in post])
                                        rhs = A.mu(cb, d, xy, [{l: ring.one} for l in pre + list(ins) + post])
                                        if (ydeg * pre_deg) % 2:
                                            rhs = {k: ring.norm(-v) for k, v in rhs.items()}
                                        rep.record("associativity")
                                        if not _eq(ring, lhs, rhs):
                                            rep.fail("associativity", component=(c, d), slot=i,
                                                     ops=(x, y))
                                            return rep
                                        if max_checks and rep.counts["associativity"] >= max_checks:
                                            return rep
    return rep


# ---------------------------------------------------------------------------
# homotopy PROP algebras

@dataclass
class LaxPropAlgebra:
    """Values ``A(x)`` on color tuples and comparison maps ``A(x) (x) A(y) -> A(x + y)``."""
    values: dict
    comparisons: dict
    structure: dict = field(default_factory=dict)


def homotopy_prop_algebra_check(P, A: LaxPropAlgebra) -> AxiomReport:
    """Every comparison map must be a quasi-isomorphism.

    Over a field the plain tensor product is derived; over Z all complexes here
    are degreewise free and bounded, hence cofibrant, so the same holds.
    """
    rep = AxiomReport()
    for (x, y), g in A.comparisons.items():
        ax, ay = A.values[tuple(x)], A.values[tuple(y)]
        axy = A.values[tuple(x) + tuple(y)]
        rep.record("comparison shape")
        if g.source.ranks != tensor(ax, ay).ranks or g.target.ranks != axy.ranks:
            rep.fail("comparison shape", objects=(x, y))
            return rep
        rep.record("comparison is a quasi-isomorphism")
        res = is_quasi_iso(g)
        if not res.ok:
            rep.fail("comparison is a quasi-isomorphism", objects=(x, y), degree=res.witness_degree)
            return rep
    for key, f in A.structure.items():
        rep.record("structure map is a chain map")
        if not f.is_chain_map():
            rep.fail("structure map is a chain map", morphism=key)
            return rep
    return rep
