"""The PROP generated by a colored operad.

Objects are color tuples.  ``hom(c, d)`` is the sum over maps of finite sets
``f: I -> J`` (``f[i]`` = block of input i) of ``(x) O(c|f^{-1}(j), d[j])``;
basis labels are ``(f, (x_0, ..., x_{|J|-1}))``.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from opforge.complexes import DgComplex, direct_sum, tensor_many
from opforge.operads.base import ArityOverflow, ColoredDgOperad, full_composition

__all__ = ["PropCalculator", "prop_from_operad"]


class PropCalculator:
    def __init__(self, O: ColoredDgOperad):
        self.operad = O
        self.ring = O.ring
        self._homs: dict = {}

    def maps(self, m: int, n: int):
        return itertools.product(range(n), repeat=m)

    def fiber(self, f, j):
        return [i for i, v in enumerate(f) if v == j]

    def prop_hom(self, c: Sequence, d: Sequence) -> DgComplex:
        c, d = tuple(c), tuple(d)
        key = (c, d)
        if key in self._homs:
            return self._homs[key]
        O = self.operad
        parts, tags = [], []
        for f in self.maps(len(c), len(d)):
            comps = []
            for j in range(len(d)):
                fib = self.fiber(f, j)
                if len(fib) > O.max_arity:
                    raise ArityOverflow(f"fiber of size {len(fib)} exceeds {O.max_arity}")
                comps.append(O.component(tuple(c[i] for i in fib), d[j]))
            if any(x.is_zero() for x in comps):
                continue
            parts.append(tensor_many(comps, self.ring))
            tags.append(f)
        if not parts:
            out = DgComplex(self.ring, {})
        else:
            out = direct_sum(*parts, tags=tags)
        self._homs[key] = out
        return out

    def _deg(self, c, d, f, xs):
        O = self.operad
        tot = []
        for j, x in enumerate(xs):
            fib = self.fiber(f, j)
            tot.append(O.degree(tuple(c[i] for i in fib), d[j], x))
        return tot

    def compose(self, c, d, e, g_lab, f_lab) -> dict:
        """``g o f`` for basis labels ``f_lab`` in hom(c, d) and ``g_lab`` in hom(d, e)."""
        O = self.operad
        ring = self.ring
        f, xs = f_lab
        g, ys = g_lab
        h = tuple(g[f[i]] for i in range(len(c)))
        xdeg = self._deg(c, d, f, xs)
        ydeg = self._deg(d, e, g, ys)
        # Koszul sign of regrouping (y_0..y_K, x_0..x_J) into (y_k, x_{g^{-1}(k)}...)_k
        seq = [("y", k) for k in range(len(e))] + [("x", j) for j in range(len(d))]
        target = []
        for k in range(len(e)):
            target.append(("y", k))
            target.extend(("x", j) for j in self.fiber(g, k))
        deg = {("y", k): ydeg[k] for k in range(len(e))}
        deg.update({("x", j): xdeg[j] for j in range(len(d))})
        pos = {t: p for p, t in enumerate(seq)}
        sign = 1
        for a in range(len(target)):
            for b in range(a + 1, len(target)):
                if pos[target[a]] > pos[target[b]] and deg[target[a]] * deg[target[b]] % 2:
                    sign = -sign
        zs = [{(): ring.one}]
        results = []
        for k in range(len(e)):
            blocks = self.fiber(g, k)
            dk = tuple(d[j] for j in blocks)
            inputs = []
            for j in blocks:
                fib = self.fiber(f, j)
                inputs.append((tuple(c[i] for i in fib), {xs[j]: ring.one}))
            ik = self.fiber(h, k)
            # map from I_k (sorted) to the blocks of y_k
            fk = tuple(blocks.index(f[i]) for i in ik)
            cols, vec = full_composition(O, dk, e[k], {ys[k]: ring.one}, inputs, fk)
            results.append(vec)
        out = {(): sign}
        for vec in results:
            nxt = {}
            for t, u in out.items():
                for z, w in vec.items():
                    nxt[t + (z,)] = nxt.get(t + (z,), 0) + u * w
            out = nxt
        return {(h, t): ring.norm(v) for t, v in out.items() if ring.norm(v)}

    def compose_vec(self, c, d, e, gv, fv) -> dict:
        out: dict = {}
        for gl, u in gv.items():
            for fl, w in fv.items():
                for k, v in self.compose(c, d, e, gl, fl).items():
                    out[k] = out.get(k, 0) + u * w * v
        return {k: self.ring.norm(v) for k, v in out.items() if self.ring.norm(v)}

    def identity(self, c) -> dict:
        O = self.operad
        xs = []
        for col in c:
            u = O.unit(col)
            if len(u) != 1:
                raise ValueError("identity needs units given by a single basis label")
            xs.append(next(iter(u)))
        return {(tuple(range(len(c))), tuple(xs)): self.ring.one}


def prop_from_operad(O: ColoredDgOperad) -> PropCalculator:
    return PropCalculator(O)
