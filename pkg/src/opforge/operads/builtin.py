"""Built-in operads: Com, Ass, their poset-colored versions, dg coefficients,
square-zero extensions and explicitly tabulated operads."""

from __future__ import annotations

import itertools
from typing import Callable, Hashable, Mapping, Sequence

from opforge.complexes import DgComplex, direct_sum, tensor, ChainMap
from opforge.exactlin import Matrix, Ring
from opforge.operads.base import (
    ColoredDgOperad, OperadError, OperadMap, PlanarColoredOperad, _OperadBase,
    _transposition_word, act_on_colors, adjacent_transpositions, compose_colors,
    perm_inverse,
)

__all__ = [
    "PosetCom", "PlanarPosetCom", "ComOperad", "AssOperad", "PlanarCom",
    "CommutativeDga", "dual_numbers_dga", "exterior_dga", "DgaCoefficients", "PlanarDgaCoefficients",
    "SquareZeroExtension", "TabulatedOperad", "tabulate", "ass_to_com", "inclusion_into_extension",
    "random_poset", "random_poset_com",
]

MU = "mu"


def _poset_sigs(colors, leq, n, unital):
    if n == 0 and not unital:
        return
    for d in colors:
        below = [c for c in colors if leq(c, d)]
        for c in itertools.product(below, repeat=n):
            yield (c, d)


class PosetCom(ColoredDgOperad):
    """``O(c, d) = k`` when every input color is below ``d``, else 0."""

    def __init__(self, ring: Ring, colors: Sequence[Hashable], leq: Callable | None = None,
                 max_arity: int = 4, unital: bool = False, name: str = ""):
        super().__init__(ring, colors, max_arity, name or "PosetCom")
        self.leq = leq or (lambda a, b: a == b)
        self.unital = unital
        self.relations = [(a, b) for a in self.colors for b in self.colors if self.leq(a, b)]

    def signatures(self, n):
        return _poset_sigs(self.colors, self.leq, n, self.unital)

    def _ok(self, c, d):
        if not c and not self.unital:
            return False
        return all(self.leq(x, d) for x in c)

    def _build_component(self, c, d):
        return DgComplex(self.ring, {0: [MU]} if self._ok(c, d) else {})

    def _act(self, c, d, x, s):
        return {MU: self.ring.one}

    def _compose(self, c, d, i, x, b, y):
        return {MU: self.ring.one}

    def _unit(self, color):
        return {MU: self.ring.one}


class PlanarPosetCom(PlanarColoredOperad):
    """Planar version of :class:`PosetCom`; its symmetrization is poset-colored Ass."""

    def __init__(self, ring, colors, leq=None, max_arity=4, unital=False, name=""):
        super().__init__(ring, colors, max_arity, name or "PlanarPosetCom")
        self.leq = leq or (lambda a, b: a == b)
        self.unital = unital

    def signatures(self, n):
        return _poset_sigs(self.colors, self.leq, n, self.unital)

    def _build_component(self, c, d):
        ok = (bool(c) or self.unital) and all(self.leq(x, d) for x in c)
        return DgComplex(self.ring, {0: [MU]} if ok else {})

    def _compose(self, c, d, i, x, b, y):
        return {MU: self.ring.one}

    def _unit(self, color):
        return {MU: self.ring.one}


def ComOperad(ring: Ring, max_arity: int = 4, unital: bool = False) -> PosetCom:
    """The commutative operad on one color ``"*"``; arity 0 only when unital."""
    return PosetCom(ring, ["*"], None, max_arity, unital, name="uCom" if unital else "Com")


def PlanarCom(ring: Ring, max_arity: int = 4, unital: bool = False) -> PlanarPosetCom:
    return PlanarPosetCom(ring, ["*"], None, max_arity, unital, name="PlanarCom")


def random_poset(rng, n_colors: int) -> tuple[list, set]:
    """Colors ``c0..`` with a seeded order: the transitive closure of random
    relations ``ci < cj`` for i < j.  Returns (colors, set of pairs a <= b)."""
    colors = [f"c{i}" for i in range(n_colors)]
    rel = {(c, c) for c in colors}
    for i in range(n_colors):
        for j in range(i + 1, n_colors):
            if rng.random() < 0.5:
                rel.add((colors[i], colors[j]))
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, e in list(rel):
                if b == c and (a, e) not in rel:
                    rel.add((a, e))
                    changed = True
    return colors, rel


def random_poset_com(ring: Ring, rng, n_colors: int = 2, max_arity: int = 4,
                     unital: bool = False, planar: bool = False):
    """A seeded poset-colored Com (or its planar version)."""
    colors, rel = random_poset(rng, n_colors)
    leq = lambda a, b: (a, b) in rel  # noqa: E731
    cls = PlanarPosetCom if planar else PosetCom
    return cls(ring, colors, leq, max_arity, unital, name=f"PosetCom[{n_colors}]")


class AssOperad(ColoredDgOperad):
    """``Ass(n) = k[Sigma_n]`` with basis the words ``x_{w_0} x_{w_1} ...``.

    The word is a tuple ``w`` listing inputs in multiplication order; the
    action sends ``w`` to ``(s^{-1}(w_k))_k``.
    """

    def __init__(self, ring: Ring, max_arity: int = 4, unital: bool = False):
        super().__init__(ring, ["*"], max_arity, "uAss" if unital else "Ass")
        self.unital = unital

    def signatures(self, n):
        if n == 0 and not self.unital:
            return
        yield (("*",) * n, "*")

    def _build_component(self, c, d):
        if not c and not self.unital:
            return DgComplex(self.ring, {})
        return DgComplex(self.ring, {0: list(itertools.permutations(range(len(c))))})

    def _act(self, c, d, w, s):
        inv = perm_inverse(s)
        return {tuple(inv[k] for k in w): self.ring.one}

    def _compose(self, c, d, i, w, b, v):
        m = len(b)
        out = []
        for k in w:
            if k == i:
                out.extend(i + r for r in v)
            else:
                out.append(k if k < i else k + m - 1)
        return {tuple(out): self.ring.one}

    def _unit(self, color):
        return {(0,): self.ring.one}


# ---------------------------------------------------------------------------
# dg coefficients

class CommutativeDga:
    """A finite graded-commutative dga given by a complex and a product on labels."""

    def __init__(self, cx: DgComplex, mult: Mapping[tuple, Mapping], unit: Hashable, name="R"):
        self.cx = cx
        self.ring = cx.ring
        self.unit = unit
        self.name = name
        self._mult = {k: dict(v) for k, v in mult.items()}
        labs = list(cx.all_labels())
        ring = self.ring
        for a in labs:
            for b in labs:
                ab = self.mul(a, b)
                ba = self.mul(b, a)
                s = -1 if (cx.degree_of(a) * cx.degree_of(b)) % 2 else 1
                if {k: ring.norm(s * v) for k, v in ba.items() if ring.norm(s * v)} != ab:
                    raise OperadError(f"product not graded commutative on {a}, {b}")
                da = cx.apply_d({a: 1})
                lhs = cx.apply_d(ab)
                rhs = {}
                for x, u in da.items():
                    for k, v in self.mul(x, b).items():
                        rhs[k] = rhs.get(k, 0) + u * v
                db = cx.apply_d({b: 1})
                sg = -1 if cx.degree_of(a) % 2 else 1
                for y, u in db.items():
                    for k, v in self.mul(a, y).items():
                        rhs[k] = rhs.get(k, 0) + sg * u * v
                rhs = {k: ring.norm(v) for k, v in rhs.items() if ring.norm(v)}
                if lhs != rhs:
                    raise OperadError(f"d is not a derivation on {a}, {b}")
                for c in labs:
                    l1, l2 = {}, {}
                    for k, u in ab.items():
                        for z, v in self.mul(k, c).items():
                            l1[z] = ring.norm(l1.get(z, 0) + u * v)
                    for k, u in self.mul(b, c).items():
                        for z, v in self.mul(a, k).items():
                            l2[z] = ring.norm(l2.get(z, 0) + u * v)
                    if {k: v for k, v in l1.items() if v} != {k: v for k, v in l2.items() if v}:
                        raise OperadError(f"product not associative on {a}, {b}, {c}")

    def mul(self, a, b) -> dict:
        if a == self.unit:
            return {b: self.ring.one}
        if b == self.unit:
            return {a: self.ring.one}
        return {k: self.ring(v) for k, v in self._mult.get((a, b), {}).items()}


def dual_numbers_dga(ring: Ring) -> CommutativeDga:
    """``k<1, t, e, et>`` with ``|t| = 0``, ``|e| = -1``, ``de = t``, ``t^2 = e^2 = 0``."""
    cx = DgComplex(ring, {0: ["1", "t"], -1: ["e", "et"]},
                   {-1: Matrix(ring, 2, 2, {(1, 0): 1})})
    mult = {("t", "e"): {"et": 1}, ("e", "t"): {"et": 1}}
    return CommutativeDga(cx, mult, "1", name="D")


def exterior_dga(ring: Ring, degree: int = 1) -> CommutativeDga:
    """``k<1, e>`` with ``e`` odd of the given degree and ``d = 0``."""
    if degree % 2 == 0:
        raise ValueError("exterior generator must have odd degree")
    cx = DgComplex(ring, {0: ["1"], degree: ["e"]})
    return CommutativeDga(cx, {}, "1", name="E")


class _DgaMixin:
    def _dga_component(self, base, c, d):
        comp = base.component(c, d)
        if comp.is_zero():
            return comp
        return tensor(comp, self.dga.cx)

    def _dga_compose(self, base, c, d, i, x, b, y):
        (p, r), (q, s) = x, y
        ring = self.ring
        sgn = -1 if (self.dga.cx.degree_of(r) * base.degree(b, c[i], q)) % 2 else 1
        pq = base.compose_labels(c, d, i, p, b, q)
        rs = self.dga.mul(r, s)
        return {(u, w): ring.norm(sgn * a * bb) for u, a in pq.items() for w, bb in rs.items()}


class DgaCoefficients(_DgaMixin, ColoredDgOperad):
    """Arity-wise tensor product ``O(c, d) (x) R`` with a commutative dga ``R``."""

    def __init__(self, base: ColoredDgOperad, dga: CommutativeDga):
        super().__init__(base.ring, base.colors, base.max_arity, f"{base.name}(x){dga.name}")
        self.base, self.dga = base, dga

    def signatures(self, n):
        return self.base.signatures(n)

    def _build_component(self, c, d):
        return self._dga_component(self.base, c, d)

    def _act(self, c, d, x, s):
        p, r = x
        return {(u, r): a for u, a in self.base.act_label(c, d, p, s).items()}

    def _compose(self, c, d, i, x, b, y):
        return self._dga_compose(self.base, c, d, i, x, b, y)

    def _unit(self, color):
        return {(u, self.dga.unit): a for u, a in self.base.unit(color).items()}


class PlanarDgaCoefficients(_DgaMixin, PlanarColoredOperad):
    def __init__(self, base: PlanarColoredOperad, dga: CommutativeDga):
        super().__init__(base.ring, base.colors, base.max_arity, f"{base.name}(x){dga.name}")
        self.base, self.dga = base, dga

    def signatures(self, n):
        return self.base.signatures(n)

    def _build_component(self, c, d):
        return self._dga_component(self.base, c, d)

    def _compose(self, c, d, i, x, b, y):
        return self._dga_compose(self.base, c, d, i, x, b, y)

    def _unit(self, color):
        return {(u, self.dga.unit): a for u, a in self.base.unit(color).items()}


# ---------------------------------------------------------------------------

class SquareZeroExtension(ColoredDgOperad):
    """``O`` plus a complex ``X`` of Sigma_2-modules placed in arity 2.

    Composites involving ``X`` vanish except with units, so ``O`` must be
    one-colored with ``O(1)`` spanned by the unit.  ``swap`` is the action of
    the transposition on ``X`` (an involutive chain map).
    """

    def __init__(self, base: ColoredDgOperad, X: DgComplex, swap: ChainMap):
        if len(base.colors) != 1:
            raise OperadError("square-zero extension needs a one-colored operad")
        super().__init__(base.ring, base.colors, base.max_arity, f"{base.name}+X")
        self.base, self.X, self.swap = base, X, swap
        col = base.colors[0]
        self.col = col
        unit = base.unit(col)
        if base.component((col,), col).total_rank() != 1 or len(unit) != 1:
            raise OperadError("O(1) must be spanned by the unit")
        self._unit_label = next(iter(unit))
        if not (swap @ swap) == ChainMap.identity(X):
            raise OperadError("swap is not an involution")

    def signatures(self, n):
        return self.base.signatures(n)

    def _build_component(self, c, d):
        comp = self.base.component(c, d)
        if len(c) != 2:
            return comp
        basis = {n: list(comp.labels(n)) + [("X", l) for l in self.X.labels(n)]
                 for n in set(comp.degrees()) | set(self.X.degrees())}
        diff = {}
        for n in basis:
            a, b = comp.d(n), self.X.d(n)
            diff[n] = Matrix.block_diag(self.ring, [a, b])
        return DgComplex(self.ring, basis, diff)

    def _is_x(self, lab):
        return isinstance(lab, tuple) and len(lab) == 2 and lab[0] == "X" and self.X.has_label(lab[1])

    def _act(self, c, d, x, s):
        if self._is_x(x):
            return {("X", l): v for l, v in self.swap.image(x[1]).items()}
        return self.base.act_label(c, d, x, s)

    def _compose(self, c, d, i, x, b, y):
        if self._is_x(x):
            return {x: self.ring.one} if y == self._unit_label and len(b) == 1 else {}
        if self._is_x(y):
            return {y: self.ring.one} if x == self._unit_label and len(c) == 1 else {}
        return self.base.compose_labels(c, d, i, x, b, y)

    def _unit(self, color):
        return self.base.unit(color)


def inclusion_into_extension(E: SquareZeroExtension) -> OperadMap:
    return OperadMap(E.base, E, {c: c for c in E.colors}, lambda c, d, x: {x: E.ring.one},
                     name="inclusion")


def ass_to_com(ass: AssOperad, com: PosetCom) -> OperadMap:
    """The canonical map sending every word to the commutative product."""
    return OperadMap(ass, com, {"*": "*"}, lambda c, d, w: {MU: ass.ring.one}, name="Ass->Com")


# ---------------------------------------------------------------------------
# explicit tables

class TabulatedOperad(ColoredDgOperad):
    """An operad given by explicit matrices.

    ``actions[(c, d, k)]`` is the matrix of the adjacent transposition
    ``(k k+1)`` from ``O(c, d)`` to ``O(c o t, d)``; ``compositions[(c, d, i, b)]``
    maps the basis of ``tensor(O(c, d), O(b, c[i]))`` to ``O(c o_i b, d)``.
    Missing entries are zero.
    """

    def __init__(self, ring, colors, max_arity, components: Mapping, actions: Mapping,
                 compositions: Mapping, units: Mapping, name="Tabulated"):
        super().__init__(ring, colors, max_arity, name)
        self._components = {(tuple(c), d): cx for (c, d), cx in components.items()}
        self._actions = dict(actions)
        self._compositions = dict(compositions)
        self._units = {k: dict(v) for k, v in units.items()}
        self._tensors: dict = {}

    def signatures(self, n):
        return [k for k in self._components if len(k[0]) == n]

    def _build_component(self, c, d):
        return self._components.get((c, d)) or DgComplex(self.ring, {})

    def _act(self, c, d, x, s):
        vec = {x: self.ring.one}
        cc = c
        for t in _transposition_word(s):
            k = next(j for j in range(len(t)) if t[j] != j)
            m = self._actions.get((cc, d, k))
            src = self.component(cc, d)
            tgt_c = act_on_colors(cc, t)
            tgt = self.component(tgt_c, d)
            if m is None:
                return {}
            out = {}
            for n, part in src.split_by_degree(vec).items():
                r = m.apply({src.index(n, l) + _offset(src, n): v for l, v in part.items()})
                out.update({_label_at(tgt, j): v for j, v in r.items()})
            vec, cc = out, tgt_c
        return vec

    def _compose(self, c, d, i, x, b, y):
        m = self._compositions.get((c, d, i, b))
        if m is None:
            return {}
        key = (c, d, i, b)
        t = self._tensors.get(key)
        if t is None:
            t = self._tensors[key] = tensor(self.component(c, d), self.component(b, c[i]))
        tgt = self.component(compose_colors(c, i, b), d)
        n = t.degree_of((x, y))
        col = m.column(t.index(n, (x, y)) + _offset(t, n))
        return {_label_at(tgt, j): v for j, v in col.items()}

    def _unit(self, color):
        return self._units.get(color, {})


def _offset(cx: DgComplex, n: int) -> int:
    """Position of degree n's first basis vector in the flattened basis."""
    return sum(cx.dim(k) for k in cx.degrees() if k < n)


def _label_at(cx: DgComplex, j: int):
    for n in cx.degrees():
        if j < cx.dim(n):
            return cx.labels(n)[j]
        j -= cx.dim(n)
    raise IndexError(j)


def flat_labels(cx: DgComplex) -> list:
    return [l for n in cx.degrees() for l in cx.labels(n)]


def tabulate(O: ColoredDgOperad) -> TabulatedOperad:
    """Record every structure map of ``O`` as flat-basis matrices."""
    ring = O.ring
    comps, acts, comps2 = {}, {}, {}
    for n in range(O.max_arity + 1):
        for c, d in O.nonzero_signatures(n):
            comps[(c, d)] = O.component(c, d)
    for (c, d), cx in comps.items():
        src = flat_labels(cx)
        for k, t in enumerate(adjacent_transpositions(len(c))):
            tc = act_on_colors(c, t)
            tgt = O.component(tc, d)
            idx = {l: j for j, l in enumerate(flat_labels(tgt))}
            cols = [{idx[z]: v for z, v in O.act_label(c, d, x, t).items()} for x in src]
            acts[(c, d, k)] = Matrix.from_columns(ring, len(idx), cols)
        for i in range(len(c)):
            for (b, e), bx in comps.items():
                if e != c[i] or len(c) + len(b) - 1 > O.max_arity:
                    continue
                tx = tensor(cx, bx)
                tgt = O.component(compose_colors(c, i, b), d)
                idx = {l: j for j, l in enumerate(flat_labels(tgt))}
                cols = [{idx[z]: v for z, v in O.compose_labels(c, d, i, x, b, y).items()}
                        for (x, y) in flat_labels(tx)]
                m = Matrix.from_columns(ring, len(idx), cols)
                if not m.is_zero():
                    comps2[(c, d, i, b)] = m
    units = {col: O.unit(col) for col in O.colors}
    return TabulatedOperad(ring, O.colors, O.max_arity, comps, acts, comps2, units, name=O.name)
