"""Operads built from other operads: symmetrization of a planar operad, the
forgetful planar operad, module operads, powers by a finite category and
chains of poset-valued (simplicial) operads."""

from __future__ import annotations

import itertools
from typing import Callable, Hashable, Mapping, Sequence

from opforge.complexes import DgComplex
from opforge.exactlin import Matrix, Ring
from opforge.operads.base import (
    ColoredDgOperad, OperadError, OperadMap, PlanarColoredOperad, _OperadBase,
    act_on_colors, compose_colors, perm_compose, perm_inverse,
)
from opforge.simplicial import shuffles, vertices_to_simplex

__all__ = [
    "SymmetrizedOperad", "ForgetfulPlanar", "ModuleOperad", "FiniteCategory", "InfiniteHom",
    "PowerByCategory", "PosetOperad", "ChainsOfPosetOperad",
    "planar_to_symmetric", "pi_projection", "module_operad", "operad_power_by_category",
    "chains_of_simplicial_operad", "ALG", "MOD",
]

ALG, MOD = "a", "m"


class SymmetrizedOperad(ColoredDgOperad):
    """``P^Sigma(c, d) = sum over orderings of P((c, order), d)``.

    Labels are ``(order, p)``: ``order`` lists the inputs in increasing
    position of the ordering and ``p`` lies in ``P(c[order], d)``.
    """

    def __init__(self, P: PlanarColoredOperad):
        super().__init__(P.ring, P.colors, P.max_arity, f"{P.name}^S")
        self.planar = P

    def signatures(self, n):
        seen = set()
        for c, d in self.planar.signatures(n):
            for s in itertools.permutations(range(n)):
                key = (act_on_colors(c, s), d)
                if key not in seen:
                    seen.add(key)
                    yield key

    def _build_component(self, c, d):
        n = len(c)
        basis: dict[int, list] = {}
        blocks = []
        orders = list(itertools.permutations(range(n)))
        parts = []
        for order in orders:
            pc = self.planar.component(act_on_colors(c, order), d)
            parts.append((order, pc))
        degs = sorted(set(k for _, pc in parts for k in pc.degrees()))
        for k in degs:
            basis[k] = [(order, p) for order, pc in parts for p in pc.labels(k)]
        diff = {}
        for k in degs:
            m = Matrix.block_diag(self.ring, [pc.d(k) for _, pc in parts])
            if not m.is_zero():
                diff[k] = m
        return DgComplex(self.ring, basis, diff, check=False)

    def _act(self, c, d, x, s):
        order, p = x
        inv = perm_inverse(s)
        return {(tuple(inv[o] for o in order), p): self.ring.one}

    def _compose(self, c, d, i, x, b, y):
        (ox, p), (oy, q) = x, y
        m = len(b)
        order = []
        for o in ox:
            if o == i:
                order.extend(i + r for r in oy)
            else:
                order.append(o if o < i else o + m - 1)
        k = ox.index(i)
        pq = self.planar.compose_labels(act_on_colors(c, ox), d, k, p, act_on_colors(b, oy), q)
        return {(tuple(order), z): v for z, v in pq.items()}

    def _unit(self, color):
        return {((0,), p): v for p, v in self.planar.unit(color).items()}


def planar_to_symmetric(P: PlanarColoredOperad) -> SymmetrizedOperad:
    return SymmetrizedOperad(P)


class ForgetfulPlanar(PlanarColoredOperad):
    """The planar operad underlying a symmetric one."""

    def __init__(self, O: ColoredDgOperad):
        super().__init__(O.ring, O.colors, O.max_arity, f"{O.name}#")
        self.base = O

    def signatures(self, n):
        return self.base.signatures(n)

    def _build_component(self, c, d):
        return self.base.component(c, d)

    def _compose(self, c, d, i, x, b, y):
        return self.base.compose_labels(c, d, i, x, b, y)

    def _unit(self, color):
        return self.base.unit(color)


def pi_projection(O: ColoredDgOperad, sym: SymmetrizedOperad | None = None) -> OperadMap:
    """``pi: (O#)^Sigma -> O``, sending ``(order, p)`` to ``p . order^{-1}``."""
    sym = sym or SymmetrizedOperad(ForgetfulPlanar(O))

    def f(c, d, lab):
        order, p = lab
        return O.act_label(act_on_colors(c, order), d, p, perm_inverse(order))

    return OperadMap(sym, O, {c: c for c in O.colors}, f, name="pi")


# ---------------------------------------------------------------------------

class ModuleOperad(ColoredDgOperad):
    """Colors ``(c, "a")`` and ``(c, "m")``; algebras are (algebra, module) pairs."""

    def __init__(self, O: ColoredDgOperad):
        colors = [(c, ALG) for c in O.colors] + [(c, MOD) for c in O.colors]
        super().__init__(O.ring, colors, O.max_arity, f"M{O.name}")
        self.base = O

    @staticmethod
    def admissible(c, d) -> bool:
        kinds = [k for _, k in c]
        if d[1] == ALG:
            return all(k == ALG for k in kinds)
        return kinds.count(MOD) == 1

    @staticmethod
    def strip(c) -> tuple:
        return tuple(x for x, _ in c)

    def signatures(self, n):
        for c, d in self.base.signatures(n):
            yield (tuple((x, ALG) for x in c), (d, ALG))
            for j in range(n):
                yield (tuple((x, MOD if k == j else ALG) for k, x in enumerate(c)), (d, MOD))

    def _build_component(self, c, d):
        if not self.admissible(c, d):
            return DgComplex(self.ring, {})
        return self.base.component(self.strip(c), d[0])

    def _act(self, c, d, x, s):
        return self.base.act_label(self.strip(c), d[0], x, s)

    def _compose(self, c, d, i, x, b, y):
        return self.base.compose_labels(self.strip(c), d[0], i, x, self.strip(b), y)

    def _unit(self, color):
        return self.base.unit(color[0])


def module_operad(O: ColoredDgOperad) -> ModuleOperad:
    return ModuleOperad(O)


# ---------------------------------------------------------------------------
# finite categories

class InfiniteHom(ValueError):
    pass


class FiniteCategory:
    """A category presented by generating arrows and relations between paths.

    Paths are tuples of arrow names in diagrammatic order (first arrow
    first).  Morphisms are represented by a canonical path: the shortest,
    then lexicographically least, path of their class.
    """

    def __init__(self, objects: Sequence[Hashable], arrows: Mapping[str, tuple],
                 relations: Sequence[tuple] = (), max_length: int = 10):
        self.objects = tuple(objects)
        self.arrows = dict(arrows)
        self.relations = [(tuple(a), tuple(b)) for a, b in relations]
        for name, (s, t) in self.arrows.items():
            if s not in self.objects or t not in self.objects:
                raise ValueError(f"arrow {name} has unknown endpoints")
        for a, b in self.relations:
            if self._ends(a, None) != self._ends(b, None) and a and b:
                raise ValueError(f"relation {a} = {b} joins paths with different endpoints")
        self._solve(max_length)

    def _ends(self, path, obj):
        if not path:
            return (obj, obj)
        return (self.arrows[path[0]][0], self.arrows[path[-1]][1])

    def _paths(self, length):
        out = [((o,), ()) for o in self.objects] if length == 0 else []
        if length == 0:
            return [(o, ()) for o in self.objects]
        frontier = [(self.arrows[a][0], (a,)) for a in sorted(self.arrows)]
        for _ in range(length - 1):
            nxt = []
            for s, p in frontier:
                t = self.arrows[p[-1]][1]
                for a in sorted(self.arrows):
                    if self.arrows[a][0] == t:
                        nxt.append((s, p + (a,)))
            frontier = nxt
        return frontier

    def _solve(self, max_length):
        for L in range(0, max_length + 1):
            paths = [p for k in range(L + 2) for p in self._paths(k)]
            parent = {p: p for p in paths}

            def find(p):
                while parent[p] != p:
                    parent[p] = parent[parent[p]]
                    p = parent[p]
                return p

            def key(p):
                return (len(p[1]), p[1])

            def union(p, q):
                a, b = find(p), find(q)
                if a != b:
                    if key(b) < key(a):
                        a, b = b, a
                    parent[b] = a

            pset = set(paths)
            changed = True
            while changed:
                changed = False
                for s, p in paths:
                    for lhs, rhs in self.relations:
                        for src, dst in ((lhs, rhs), (rhs, lhs)):
                            k = len(src)
                            for pos in range(len(p) - k + 1):
                                if p[pos:pos + k] == src:
                                    q = p[:pos] + dst + p[pos + k:]
                                    if (s, q) in pset and find((s, p)) != find((s, q)):
                                        union((s, p), (s, q))
                                        changed = True
            longest = [p for p in paths if len(p[1]) == L + 1]
            if all(len(find(p)[1]) <= L for p in longest):
                self._L = L
                self._find = {p: find(p) for p in paths}
                self.morphisms = sorted({find(p) for p in paths if len(p[1]) <= L},
                                        key=lambda p: (repr(p[0]), key(p)))
                return
        raise InfiniteHom(f"hom-sets not finite up to path length {max_length}")

    def source(self, m):
        return m[0]

    def target(self, m):
        return self.arrows[m[1][-1]][1] if m[1] else m[0]

    def identity(self, obj):
        return (obj, ())

    def hom(self, a, b) -> list:
        return [m for m in self.morphisms if m[0] == a and self.target(m) == b]

    def compose(self, f, g):
        """``g o f`` (first f, then g)."""
        if self.target(f) != g[0]:
            raise ValueError("arrows not composable")
        s, p = f[0], f[1] + g[1]
        while len(p) > self._L:
            head = self._find[(s, p[:self._L + 1])]
            p = head[1] + p[self._L + 1:]
        return self._find[(s, p)]


class PowerByCategory(ColoredDgOperad):
    """``R^C``: colors ``(c, m)``; ``R^C((c_i, m_i), (d, n))`` is a sum over
    arrows ``phi_i: m_i -> n`` of copies of ``R(c, d)``; labels ``(phi, r)``."""

    def __init__(self, R: ColoredDgOperad, C: FiniteCategory):
        colors = [(c, m) for c in R.colors for m in C.objects]
        super().__init__(R.ring, colors, R.max_arity, f"{R.name}^C")
        self.base, self.cat = R, C

    def signatures(self, n):
        for c, d in self.base.signatures(n):
            for ms in itertools.product(self.cat.objects, repeat=n):
                for m in self.cat.objects:
                    yield (tuple(zip(c, ms)), (d, m))

    def _build_component(self, c, d):
        rc = self.base.component(tuple(x for x, _ in c), d[0])
        homs = [self.cat.hom(m, d[1]) for _, m in c]
        phis = list(itertools.product(*homs))
        if rc.is_zero() or not phis:
            return DgComplex(self.ring, {})
        basis = {k: [(phi, r) for phi in phis for r in rc.labels(k)] for k in rc.degrees()}
        diff = {k: Matrix.block_diag(self.ring, [rc.d(k)] * len(phis)) for k in rc.degrees()}
        return DgComplex(self.ring, basis, {k: m for k, m in diff.items() if not m.is_zero()},
                         check=False)

    def _act(self, c, d, x, s):
        phi, r = x
        cs = tuple(y for y, _ in c)
        return {(act_on_colors(phi, s), z): v for z, v in self.base.act_label(cs, d[0], r, s).items()}

    def _compose(self, c, d, i, x, b, y):
        (phi, r), (psi, q) = x, y
        new = tuple(self.cat.compose(p, phi[i]) for p in psi)
        phin = phi[:i] + new + phi[i + 1:]
        rc = self.base.compose_labels(tuple(u for u, _ in c), d[0], i, r,
                                      tuple(u for u, _ in b), q)
        return {(phin, z): v for z, v in rc.items()}

    def _unit(self, color):
        return {((self.cat.identity(color[1]),), z): v for z, v in self.base.unit(color[0]).items()}


def operad_power_by_category(R: ColoredDgOperad, C: FiniteCategory) -> PowerByCategory:
    return PowerByCategory(R, C)


# ---------------------------------------------------------------------------
# simplicial operads given by posets

class PosetOperad:
    """An operad in finite posets (hence, via nerves, in simplicial sets).

    ``elements(c, d)`` lists the poset ``O(c, d)``; ``leq(c, d, p, q)`` is its
    order; ``compose(c, d, i, p, b, q)``, ``act(c, d, p, s)`` and ``unit(c)``
    are monotone structure maps on elements.
    """

    def __init__(self, colors, max_arity, elements: Callable, leq: Callable,
                 compose: Callable, act: Callable, unit: Callable, name="P"):
        self.colors = tuple(colors)
        self.max_arity = max_arity
        self.elements, self.leq = elements, leq
        self.compose, self.act, self.unit = compose, act, unit
        self.name = name

    @classmethod
    def point_operad(cls, max_arity=4, nullary=False):
        """Every component a point: chains give Com."""
        return cls(["*"], max_arity,
                   lambda c, d: ["pt"] if (c or nullary) else [],
                   lambda c, d, p, q: True,
                   lambda c, d, i, p, b, q: "pt",
                   lambda c, d, p, s: "pt",
                   lambda col: "pt", name="Pt")


class ChainsOfPosetOperad(ColoredDgOperad):
    """Normalized chains of the nerves; compositions are ``C(o_i) o EM``.

    Basis labels are strict chains ``(p_0 < p_1 < ... < p_k)`` in degree -k.
    """

    def __init__(self, P: PosetOperad, ring: Ring):
        super().__init__(ring, P.colors, P.max_arity, f"C({P.name})")
        self.poset = P

    def _build_component(self, c, d):
        els = list(self.poset.elements(c, d))
        leq = lambda a, b: self.poset.leq(c, d, a, b)
        chains = {0: [(e,) for e in els]}
        k = 0
        while chains[k]:
            chains[k + 1] = [ch + (e,) for ch in chains[k] for e in els
                             if e != ch[-1] and leq(ch[-1], e)]
            k += 1
        basis = {-k: v for k, v in chains.items() if v}
        cx = DgComplex(self.ring, basis, check=False)
        diff = {}
        for k, v in chains.items():
            if k == 0 or not v:
                continue
            cols = []
            for ch in v:
                col = {}
                for i in range(k + 1):
                    f = ch[:i] + ch[i + 1:]
                    j = cx.index(-(k - 1), f)
                    col[j] = col.get(j, 0) + (-1) ** i
                cols.append(col)
            diff[-k] = Matrix.from_columns(self.ring, cx.dim(-(k - 1)), cols)
        return DgComplex(self.ring, basis, diff)

    def _act(self, c, d, x, s):
        img = tuple(self.poset.act(c, d, p, s) for p in x)
        return {img: self.ring.one}

    def _compose(self, c, d, i, x, b, y):
        p, q = len(x) - 1, len(y) - 1
        out: dict = {}
        for mu, nu, sgn in shuffles(p, q):
            xs = _degen_vertices(x, nu)
            ys = _degen_vertices(y, mu)
            zs = tuple(self.poset.compose(c, d, i, a, b, e) for a, e in zip(xs, ys))
            strict, surj = vertices_to_simplex(zs)
            if len(strict) != len(zs):
                continue
            out[strict] = out.get(strict, 0) + sgn
        return out

    def _unit(self, color):
        return {(self.poset.unit(color),): self.ring.one}


def _degen_vertices(chain, seq):
    """Vertex sequence of ``s_{seq[-1]} ... s_{seq[0]}`` applied to a chain."""
    v = list(chain)
    for j in seq:
        v.insert(j, v[j])
    return tuple(v)


def chains_of_simplicial_operad(P: PosetOperad, ring: Ring) -> ChainsOfPosetOperad:
    return ChainsOfPosetOperad(P, ring)
