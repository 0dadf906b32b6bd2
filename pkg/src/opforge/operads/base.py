"""Colored dg operads stored skeletally.

An operad supplies, for every input color tuple ``c`` and output color ``d``
with ``len(c) <= max_arity``, a complex ``O(c, d)`` with labelled basis.
Structure is given on basis labels:

* right action: ``x . s`` lies in ``O(c o s, d)`` where ``(c o s)[j] = c[s[j]]``
  (new input j is old input s[j]), so ``(x . s) . t = x . (s o t)``;
* partial composition ``x o_i y`` for ``y`` in ``O(b, c[i])`` lands in
  ``O(c[:i] + b + c[i+1:], d)``;
* units ``1_c`` in ``O((c,), c)``.

Input slots are 0-based throughout.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from opforge.complexes import ChainMap, DgComplex, GradedMap, lvec_add, tensor
from opforge.exactlin import Matrix, Ring

__all__ = [
    "ArityOverflow", "MissingNullary", "OperadError",
    "ColoredDgOperad", "PlanarColoredOperad", "OperadMap", "AxiomReport",
    "check_operad_axioms", "check_planar_axioms", "check_operad_map", "full_composition",
    "perm_compose", "perm_inverse", "identity_perm", "adjacent_transpositions",
    "block_permutation", "act_on_colors", "compose_colors", "sort_perm",
]


class OperadError(ValueError):
    pass


class ArityOverflow(OperadError):
    pass


class MissingNullary(OperadError):
    pass


# ---------------------------------------------------------------------------
# permutations

def identity_perm(n: int) -> tuple:
    return tuple(range(n))


def perm_compose(s: Sequence[int], t: Sequence[int]) -> tuple:
    """``s o t``."""
    return tuple(s[k] for k in t)


def perm_inverse(s: Sequence[int]) -> tuple:
    out = [0] * len(s)
    for j, v in enumerate(s):
        out[v] = j
    return tuple(out)


def adjacent_transpositions(n: int) -> list[tuple]:
    out = []
    for k in range(n - 1):
        t = list(range(n))
        t[k], t[k + 1] = k + 1, k
        out.append(tuple(t))
    return out


def act_on_colors(c: Sequence, s: Sequence[int]) -> tuple:
    return tuple(c[k] for k in s)


def compose_colors(c: Sequence, i: int, b: Sequence) -> tuple:
    return tuple(c[:i]) + tuple(b) + tuple(c[i + 1:])


def sort_perm(c: Sequence) -> tuple:
    """The stable permutation ``s`` with ``c o s`` sorted."""
    return tuple(sorted(range(len(c)), key=lambda k: (_sort_key(c[k]), k)))


def _sort_key(v):
    return repr(v) if not isinstance(v, (int, str)) else (0, v) if isinstance(v, int) else (1, v)


def block_permutation(s: Sequence[int], sizes: Sequence[int],
                      inner: Mapping[int, Sequence[int]] | None = None) -> tuple:
    """Permutation of concatenated blocks induced by ``s``.

    ``sizes[k]`` is the size of the block attached to old input k.  The new
    layout lists the blocks in the order ``s[0], s[1], ...``; ``inner[j]``
    optionally permutes inside the new block j the same way.
    """
    offs, acc = [], 0
    for z in sizes:
        offs.append(acc)
        acc += z
    out = []
    for j, k in enumerate(s):
        p = inner.get(j) if inner else None
        for r in range(sizes[k]):
            out.append(offs[k] + (p[r] if p is not None else r))
    return tuple(out)


# ---------------------------------------------------------------------------

class _OperadBase:
    """Shared machinery for symmetric and planar operads."""

    symmetric = False

    def __init__(self, ring: Ring, colors: Sequence[Hashable], max_arity: int, name: str = ""):
        self.ring = ring
        self.colors = tuple(colors)
        self.max_arity = max_arity
        self.name = name or type(self).__name__
        self._lock = threading.RLock()
        self._comp_cache: dict = {}
        self._compose_cache: dict = {}
        self._act_cache: dict = {}
        self._sig_cache: dict = {}

    # -- to be provided ---------------------------------------------------------
    def _build_component(self, c: tuple, d) -> DgComplex:
        raise NotImplementedError

    def _compose(self, c: tuple, d, i: int, x, b: tuple, y) -> Mapping:
        raise NotImplementedError

    def _unit(self, color) -> Mapping:
        raise NotImplementedError

    def signatures(self, n: int) -> Iterable[tuple]:
        """Candidate ``(c, d)`` of arity n; the default lists every color tuple."""
        for c in itertools.product(self.colors, repeat=n):
            for d in self.colors:
                yield (c, d)

    # -- public, memoized -------------------------------------------------------
    def component(self, c: Sequence, d) -> DgComplex:
        c = tuple(c)
        if len(c) > self.max_arity:
            raise ArityOverflow(f"arity {len(c)} exceeds {self.max_arity}")
        key = (c, d)
        got = self._comp_cache.get(key)
        if got is None:
            with self._lock:
                got = self._comp_cache.get(key)
                if got is None:
                    got = self._build_component(c, d)
                    self._comp_cache[key] = got
        return got

    def nonzero_signatures(self, n: int) -> list[tuple]:
        got = self._sig_cache.get(n)
        if got is None:
            got = [(c, d) for c, d in self.signatures(n) if not self.component(c, d).is_zero()]
            self._sig_cache[n] = got
        return got

    def signatures_into(self, d, n: int) -> list[tuple]:
        return [c for c, e in self.nonzero_signatures(n) if e == d]

    def degree(self, c, d, label) -> int:
        return self.component(c, d).degree_of(label)

    def unit(self, color) -> dict:
        return dict(self._unit(color))

    def compose_labels(self, c, d, i, x, b, y) -> dict:
        c, b = tuple(c), tuple(b)
        if len(c) + len(b) - 1 > self.max_arity:
            raise ArityOverflow(f"composite arity {len(c) + len(b) - 1} exceeds {self.max_arity}")
        key = (c, d, i, x, b, y)
        got = self._compose_cache.get(key)
        if got is None:
            got = {k: v for k, v in self._compose(c, d, i, x, b, y).items() if v}
            self._compose_cache[key] = got
        return got

    def compose(self, c, d, i, vx: Mapping, b, vy: Mapping) -> dict:
        out: dict = {}
        norm = self.ring.norm
        for x, u in vx.items():
            for y, w in vy.items():
                for z, v in self.compose_labels(c, d, i, x, b, y).items():
                    out[z] = out.get(z, 0) + u * w * v
        return {z: s for z, s in ((z, norm(s)) for z, s in out.items()) if s}

    def composition_map(self, c, d, i, b) -> ChainMap:
        c, b = tuple(c), tuple(b)
        src = tensor(self.component(c, d), self.component(b, c[i]))
        tgt = self.component(compose_colors(c, i, b), d)
        return ChainMap.from_function(
            src, tgt, lambda lab: self.compose_labels(c, d, i, lab[0], b, lab[1]), check=False)

    def arity_range(self):
        return range(self.max_arity + 1)

    def __repr__(self):
        return f"{self.name}({self.ring}, colors={list(self.colors)}, max_arity={self.max_arity})"


class ColoredDgOperad(_OperadBase):
    symmetric = True

    def _act(self, c: tuple, d, x, s: tuple) -> Mapping:
        raise NotImplementedError

    def act_label(self, c, d, x, s) -> dict:
        c, s = tuple(c), tuple(s)
        key = (c, d, x, s)
        got = self._act_cache.get(key)
        if got is None:
            if s == identity_perm(len(s)):
                got = {x: self.ring.one}
            else:
                got = {k: v for k, v in self._act(c, d, x, s).items() if v}
            self._act_cache[key] = got
        return got

    def act(self, c, d, vec: Mapping, s) -> dict:
        out: dict = {}
        for x, u in vec.items():
            for z, v in self.act_label(c, d, x, s).items():
                out[z] = out.get(z, 0) + u * v
        norm = self.ring.norm
        return {z: w for z, w in ((z, norm(w)) for z, w in out.items()) if w}

    def action_map(self, c, d, s) -> ChainMap:
        c = tuple(c)
        return ChainMap.from_function(
            self.component(c, d), self.component(act_on_colors(c, s), d),
            lambda lab: self.act_label(c, d, lab, s), check=False)


class PlanarColoredOperad(_OperadBase):
    symmetric = False


# ---------------------------------------------------------------------------
# full composition

def full_composition(O: _OperadBase, d: Sequence, e, x: Mapping,
                     inputs: Sequence[tuple], f: Sequence[int] | None = None) -> tuple[tuple, dict]:
    """Compose ``x`` in ``O(d, e)`` with ``inputs[j] = (c_j, y_j)``, ``y_j`` in ``O(c_j, d[j])``.

    Without ``f`` the result lives in ``O(c_0 + c_1 + ..., e)`` (block order),
    computed left to right as ``(..(x o_0 y_0) o_{|c_0|} y_1 ..)``.  With a map
    of finite sets ``f: I -> J`` (``f[i]`` the block of input i), block j
    receives the inputs ``f^{-1}(j)`` in increasing order and the result is
    permuted into the order of ``I``.  Returns ``(colors, vector)``.
    """
    d = tuple(d)
    if len(inputs) != len(d):
        raise ValueError("one input per slot of x is required")
    total = sum(len(c) for c, _ in inputs)
    if total > O.max_arity:
        raise ArityOverflow(f"composite arity {total} exceeds {O.max_arity}")
    if f is not None:
        fibers = [[i for i, j in enumerate(f) if j == k] for k in range(len(d))]
        for k, (c, _) in enumerate(inputs):
            if len(c) != len(fibers[k]):
                raise ValueError(f"block {k} has arity {len(c)} but fiber size {len(fibers[k])}")
        for k, fb in enumerate(fibers):
            if not fb and O.component((), d[k]).is_zero():
                raise MissingNullary(f"no nullary operation of color {d[k]!r}")
    colors, res = _compose_all(O, d, e, x, inputs)
    if f is None:
        return colors, res
    order = [i for fb in fibers for i in fb]
    if not O.symmetric:
        if order != sorted(order):
            raise OperadError("planar operads only compose along monotone maps")
        return colors, res
    s = perm_inverse(order)
    return act_on_colors(colors, s), O.act(colors, e, res, s)



def _compose_all(O, d, e, x, inputs):
    # Inputs of arity <= 1 go first so intermediate arities never exceed the
    # final one; the Koszul sign of the reordering restores left-to-right order.
    n = len(inputs)
    plan = sorted(range(n), key=lambda j: (len(inputs[j][0]) > 1, j))
    final = tuple(col for c, _ in inputs for col in c)
    ring = O.ring
    out: dict = {}
    supports = [list(y.items()) for _, y in inputs]
    for combo in itertools.product(*supports):
        coeff = ring.one
        for _, u in combo:
            coeff = coeff * u
        degs = [O.degree(inputs[j][0], d[j], combo[j][0]) for j in range(n)]
        sign = 1
        for a in range(n):
            for b in range(a + 1, n):
                if plan[a] > plan[b] and degs[plan[a]] * degs[plan[b]] % 2:
                    sign = -sign
        res = dict(x)
        cols = list(tuple(d))
        width = [1] * n
        for j in plan:
            if not res:
                break
            pos = sum(width[:j])
            c = inputs[j][0]
            res = O.compose(tuple(cols), e, pos, res, c, {combo[j][0]: ring.one})
            cols[pos:pos + 1] = list(c)
            width[j] = len(c)
        for z, v in res.items():
            out[z] = out.get(z, 0) + sign * coeff * v
    return final, {z: ring.norm(v) for z, v in out.items() if ring.norm(v)}

# ---------------------------------------------------------------------------
# axiom checks

@dataclass
class AxiomReport:
    ok: bool = True
    counts: dict = field(default_factory=dict)
    failure: str | None = None
    witness: dict | None = None

    def record(self, axiom: str):
        self.counts[axiom] = self.counts.get(axiom, 0) + 1

    def fail(self, axiom: str, **witness):
        if self.ok:
            self.ok = False
            self.failure = axiom
            self.witness = witness

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        lines = [f"{k}: {v} checks" for k, v in self.counts.items()]
        if self.ok:
            lines.append("PASS")
        else:
            lines.append(f"FAIL {self.failure}: {self.witness}")
        return "\n".join(lines)


def _eq(ring, a: Mapping, b: Mapping) -> bool:
    return not lvec_add(ring, a, b, coeffs=(1, -1))


def _sgn(a: int) -> int:
    return -1 if a % 2 else 1


def check_operad_axioms(O: _OperadBase, max_arity: int | None = None,
                        stop_at_first: bool = True) -> AxiomReport:
    """Exhaustively verify the operad axioms on all tabulated basis elements."""
    A = O.max_arity if max_arity is None else min(max_arity, O.max_arity)
    ring = O.ring
    rep = AxiomReport()
    sigs = {n: O.nonzero_signatures(n) for n in range(A + 1)}
    into: dict = {}
    for n in range(A + 1):
        for c, d in sigs[n]:
            into.setdefault(d, []).append(c)

    def done():
        return stop_at_first and not rep.ok

    # components are complexes; d^2 = 0 is enforced by DgComplex, recorded here
    for n in range(A + 1):
        for c, d in sigs[n]:
            rep.record("d^2 = 0")
            comp = O.component(c, d)
            try:
                comp.check()
            except ValueError as exc:
                rep.fail("d^2 = 0", component=(c, d), detail=str(exc))
                return rep

    # units are cycles of degree 0
    for col in O.colors:
        u = O.unit(col)
        rep.record("unit is a degree 0 cycle")
        comp = O.component((col,), col)
        if not u or any(comp.degree_of(l) != 0 for l in u) or comp.apply_d(u):
            rep.fail("unit is a degree 0 cycle", color=col)
            return rep

    if O.symmetric:
        for n in range(2, A + 1):
            gens = adjacent_transpositions(n)
            for c, d in sigs[n]:
                comp = O.component(c, d)
                for x in comp.all_labels():
                    vx = {x: ring.one}
                    for t in gens:
                        rep.record("action is a chain map")
                        lhs = O.component(act_on_colors(c, t), d).apply_d(O.act(c, d, vx, t))
                        rhs = O.act(c, d, comp.apply_d(vx), t)
                        if not _eq(ring, lhs, rhs):
                            rep.fail("action is a chain map", component=(c, d), label=x, perm=t)
                            return rep
                        rep.record("symmetric group relations")
                        tt = O.act(act_on_colors(c, t), d, O.act(c, d, vx, t), t)
                        if not _eq(ring, tt, vx):
                            rep.fail("symmetric group relations", relation="s^2 = 1",
                                     component=(c, d), label=x, perm=t)
                            return rep
                    for a, b in itertools.combinations(range(len(gens)), 2):
                        s, t = gens[a], gens[b]
                        k = 3 if b == a + 1 else 2
                        w1, w2 = vx, vx
                        c1 = c2 = c
                        for _ in range(k):
                            w1 = O.act(c1, d, w1, s)
                            c1 = act_on_colors(c1, s)
                            w1 = O.act(c1, d, w1, t)
                            c1 = act_on_colors(c1, t)
                        rep.record("symmetric group relations")
                        if not _eq(ring, w1, w2):
                            rep.fail("symmetric group relations",
                                     relation="braid" if k == 3 else "commutation",
                                     component=(c, d), label=x, perms=(s, t))
                            return rep
                    # the action agrees with composites of transpositions
                    for s in itertools.permutations(range(n)):
                        w = vx
                        cc = c
                        for t in _transposition_word(s):
                            w = O.act(cc, d, w, t)
                            cc = act_on_colors(cc, t)
                        rep.record("action is generated by transpositions")
                        if not _eq(ring, w, O.act(c, d, vx, s)):
                            rep.fail("action is generated by transpositions",
                                     component=(c, d), label=x, perm=s)
                            return rep

    # partial compositions: chain map, units, equivariance
    for n in range(1, A + 1):
        for c, d in sigs[n]:
            comp = O.component(c, d)
            for x in comp.all_labels():
                vx = {x: ring.one}
                dx_ = comp.degree_of(x)
                rep.record("unit laws")
                if not _eq(ring, O.compose((d,), d, 0, O.unit(d), c, vx), vx):
                    rep.fail("unit laws", side="left", component=(c, d), label=x)
                    return rep
                for i in range(n):
                    rep.record("unit laws")
                    if not _eq(ring, O.compose(c, d, i, vx, (c[i],), O.unit(c[i])), vx):
                        rep.fail("unit laws", side="right", slot=i, component=(c, d), label=x)
                        return rep
                    for m in range(0, A - n + 2):
                        for b in _into(into, c[i], m):
                            bc = O.component(b, c[i])
                            tgt = O.component(compose_colors(c, i, b), d)
                            for y in bc.all_labels():
                                vy = {y: ring.one}
                                rep.record("composition is a chain map")
                                lhs = tgt.apply_d(O.compose(c, d, i, vx, b, vy))
                                rhs = lvec_add(ring, O.compose(c, d, i, comp.apply_d(vx), b, vy),
                                               O.compose(c, d, i, vx, b, bc.apply_d(vy)),
                                               coeffs=(1, _sgn(dx_)))
                                if not _eq(ring, lhs, rhs):
                                    rep.fail("composition is a chain map", component=(c, d),
                                             slot=i, inner=(b, c[i]), labels=(x, y))
                                    return rep
                                if O.symmetric:
                                    _check_equivariance(O, rep, c, d, i, x, b, y)
                                    if done():
                                        return rep
    # associativity
    for n in range(1, A + 1):
        for c, d in sigs[n]:
            for x in O.component(c, d).all_labels():
                vx = {x: ring.one}
                for i in range(n):
                    for m in range(0, A - n + 2):
                        for b in _into(into, c[i], m):
                            for y in O.component(b, c[i]).all_labels():
                                vy = {y: ring.one}
                                xy = O.compose(c, d, i, vx, b, vy)
                                cxy = compose_colors(c, i, b)
                                dy = O.degree(b, c[i], y)
                                room = A - (n + m - 1)
                                # sequential: z into an input of y
                                for j in range(m):
                                    for l in range(0, room + 2):
                                        for e in _into(into, b[j], l):
                                            for z in O.component(e, b[j]).all_labels():
                                                vz = {z: ring.one}
                                                lhs = O.compose(cxy, d, i + j, xy, e, vz)
                                                yz = O.compose(b, c[i], j, vy, e, vz)
                                                rhs = O.compose(c, d, i, vx, compose_colors(b, j, e), yz)
                                                rep.record("sequential associativity")
                                                if not _eq(ring, lhs, rhs):
                                                    rep.fail("sequential associativity",
                                                             component=(c, d), slots=(i, j),
                                                             labels=(x, y, z))
                                                    return rep
                                # parallel: z into another input k of x, with k > i
                                for k in range(i + 1, n):
                                    for l in range(0, min(room + 2, A - n + 2)):
                                        for e in _into(into, c[k], l):
                                            for z in O.component(e, c[k]).all_labels():
                                                vz = {z: ring.one}
                                                dz = O.degree(e, c[k], z)
                                                lhs = O.compose(cxy, d, k + m - 1, xy, e, vz)
                                                xz = O.compose(c, d, k, vx, e, vz)
                                                cxz = compose_colors(c, k, e)
                                                rhs = O.compose(cxz, d, i, xz, b, vy)
                                                rep.record("parallel associativity")
                                                if not _eq(ring, lhs, {kk: ring.norm(v * _sgn(dy * dz))
                                                                       for kk, v in rhs.items()}):
                                                    rep.fail("parallel associativity",
                                                             component=(c, d), slots=(i, k),
                                                             labels=(x, y, z))
                                                    return rep
    return rep


def _into(into, color, m):
    return [b for b in into.get(color, ()) if len(b) == m]


def _transposition_word(s: Sequence[int]) -> list[tuple]:
    """Adjacent transpositions t_1, ..., t_r with ``s = t_1 o t_2 o ... o t_r``."""
    n = len(s)
    cur = list(s)
    word = []
    # bubble sort cur into the identity by right multiplication with transpositions
    changed = True
    while changed:
        changed = False
        for k in range(n - 1):
            if cur[k] > cur[k + 1]:
                cur[k], cur[k + 1] = cur[k + 1], cur[k]
                t = list(range(n))
                t[k], t[k + 1] = k + 1, k
                word.append(tuple(t))
                changed = True
    # s o t_1 o ... o t_r = id, so s = t_r o ... o t_1
    return list(reversed(word))


def _check_equivariance(O, rep, c, d, i, x, b, y):
    ring = O.ring
    n, m = len(c), len(b)
    vx, vy = {x: ring.one}, {y: ring.one}
    # (x . s) o_{s^-1(i)} y = (x o_i y) . s'
    for s in adjacent_transpositions(n):
        cs = act_on_colors(c, s)
        j = s[i]
        lhs = O.compose(cs, d, j, O.act(c, d, vx, s), b, vy)
        sizes = [1] * n
        sizes[i] = m
        sp = block_permutation(s, sizes)
        rhs = O.act(compose_colors(c, i, b), d, O.compose(c, d, i, vx, b, vy), sp)
        rep.record("equivariance")
        if not _eq(ring, lhs, rhs):
            rep.fail("equivariance", side="outer", component=(c, d), slot=i,
                     perm=s, labels=(x, y))
            return
    # x o_i (y . t) = (x o_i y) . t'
    for t in adjacent_transpositions(m):
        bt = act_on_colors(b, t)
        lhs = O.compose(c, d, i, vx, bt, O.act(b, c[i], vy, t))
        sizes = [1] * n
        sizes[i] = m
        tp = block_permutation(identity_perm(n), sizes, {i: t})
        rhs = O.act(compose_colors(c, i, b), d, O.compose(c, d, i, vx, b, vy), tp)
        rep.record("equivariance")
        if not _eq(ring, lhs, rhs):
            rep.fail("equivariance", side="inner", component=(c, d), slot=i,
                     perm=t, labels=(x, y))
            return


def check_planar_axioms(P: PlanarColoredOperad, max_arity: int | None = None) -> AxiomReport:
    return check_operad_axioms(P, max_arity)


# ---------------------------------------------------------------------------
# maps

class OperadMap:
    """A map of operads: a color map and componentwise chain maps on labels."""

    def __init__(self, source: _OperadBase, target: _OperadBase, color_map: Mapping,
                 on_labels: Callable[[tuple, object, object], Mapping], name: str = ""):
        self.source, self.target = source, target
        self.color_map = dict(color_map)
        self._f = on_labels
        self.name = name or "f"
        self._cache: dict = {}

    def image_colors(self, c):
        return tuple(self.color_map[x] for x in c)

    def apply_label(self, c, d, x) -> dict:
        key = (tuple(c), d, x)
        got = self._cache.get(key)
        if got is None:
            got = {k: v for k, v in self._f(tuple(c), d, x).items() if v}
            self._cache[key] = got
        return got

    def apply(self, c, d, vec: Mapping) -> dict:
        out: dict = {}
        for x, u in vec.items():
            for z, v in self.apply_label(c, d, x).items():
                out[z] = out.get(z, 0) + u * v
        norm = self.target.ring.norm
        return {z: w for z, w in ((z, norm(w)) for z, w in out.items()) if w}

    def component_map(self, c, d) -> ChainMap:
        c = tuple(c)
        return ChainMap.from_function(
            self.source.component(c, d),
            self.target.component(self.image_colors(c), self.color_map[d]),
            lambda lab: self.apply_label(c, d, lab), check=False)

    def is_bijective_on_colors(self) -> bool:
        vals = list(self.color_map.values())
        return len(set(vals)) == len(vals) and set(vals) == set(self.target.colors)

    @classmethod
    def identity(cls, O: _OperadBase) -> "OperadMap":
        return cls(O, O, {c: c for c in O.colors}, lambda c, d, x: {x: O.ring.one}, name="id")


def check_operad_map(f: OperadMap, max_arity: int | None = None) -> AxiomReport:
    """Verify that ``f`` is a chain map on components and preserves all structure."""
    S, T = f.source, f.target
    ring = S.ring
    A = S.max_arity if max_arity is None else min(max_arity, S.max_arity)
    rep = AxiomReport()
    fc = f.image_colors
    for col in S.colors:
        rep.record("preserves units")
        if not _eq(ring, f.apply((col,), col, S.unit(col)), T.unit(f.color_map[col])):
            rep.fail("preserves units", color=col)
            return rep
    for n in range(A + 1):
        for c, d in S.nonzero_signatures(n):
            comp = S.component(c, d)
            tcomp = T.component(fc(c), f.color_map[d])
            for x in comp.all_labels():
                vx = {x: ring.one}
                rep.record("commutes with d")
                if not _eq(ring, tcomp.apply_d(f.apply(c, d, vx)), f.apply(c, d, comp.apply_d(vx))):
                    rep.fail("commutes with d", component=(c, d), label=x)
                    return rep
                if S.symmetric and T.symmetric:
                    for s in adjacent_transpositions(n):
                        rep.record("preserves the action")
                        lhs = f.apply(act_on_colors(c, s), d, S.act(c, d, vx, s))
                        rhs = T.act(fc(c), f.color_map[d], f.apply(c, d, vx), s)
                        if not _eq(ring, lhs, rhs):
                            rep.fail("preserves the action", component=(c, d), label=x, perm=s)
                            return rep
                for i in range(n):
                    for m in range(0, A - n + 2):
                        for b, e in S.nonzero_signatures(m):
                            if e != c[i]:
                                continue
                            for y in S.component(b, e).all_labels():
                                vy = {y: ring.one}
                                lhs = f.apply(compose_colors(c, i, b), d, S.compose(c, d, i, vx, b, vy))
                                rhs = T.compose(fc(c), f.color_map[d], i, f.apply(c, d, vx),
                                                fc(b), f.apply(b, e, vy))
                                rep.record("preserves compositions")
                                if not _eq(ring, lhs, rhs):
                                    rep.fail("preserves compositions", component=(c, d),
                                             slot=i, labels=(x, y))
                                    return rep
    return rep
