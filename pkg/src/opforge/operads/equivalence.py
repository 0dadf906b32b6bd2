"""Weak and strong equivalences of operads and Sigma-cofibrancy certificates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from opforge.complexes import ChainMap, is_quasi_iso, quotient_by_subspace
from opforge.exactlin import Matrix, rank, smith_normal_form
from opforge.operads.base import ColoredDgOperad, OperadMap, act_on_colors

__all__ = [
    "EquivalenceReport", "BadBasis", "check_weak_equivalence", "check_strong_equivalence",
    "sigma_cofibrant_certificate", "stabilizer", "set_partitions", "coinvariant_complex",
    "CERTIFIED", "UNKNOWN",
]

CERTIFIED = "certified"
UNKNOWN = "unknown"


class BadBasis(ValueError):
    pass


@dataclass
class EquivalenceReport:
    ok: bool = True
    checked: int = 0
    condition_b: str = "unchecked"
    witness: dict | None = None

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return f"PASS ({self.checked} components; condition (b): {self.condition_b})"
        return f"FAIL at {self.witness}"


def check_weak_equivalence(f: OperadMap, max_arity: int | None = None) -> EquivalenceReport:
    """Condition (a) on every tabulated component; condition (b) only for bijective color maps."""
    S = f.source
    A = S.max_arity if max_arity is None else min(max_arity, S.max_arity)
    rep = EquivalenceReport()
    for n in range(A + 1):
        for c, d in S.signatures(n):
            tgt = f.target.component(f.image_colors(c), f.color_map[d])
            if S.component(c, d).is_zero() and tgt.is_zero():
                continue
            res = is_quasi_iso(f.component_map(c, d))
            rep.checked += 1
            if not res.ok:
                rep.ok = False
                rep.witness = {"component": (c, d), "degree": res.witness_degree,
                               "reason": res.reason}
                return rep
    rep.condition_b = "automatic (bijective on colors)" if f.is_bijective_on_colors() else "unchecked"
    return rep


def set_partitions(items: Sequence):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def _block_generators(blocks, n):
    gens = []
    for blk in blocks:
        blk = sorted(blk)
        for a, b in zip(blk, blk[1:]):
            t = list(range(n))
            t[a], t[b] = b, a
            gens.append(tuple(t))
    return gens


def coinvariant_complex(O: ColoredDgOperad, c, d, gens):
    """``O(c, d)`` modulo the span of ``g x - x``; returns (complex, projection)."""
    comp = O.component(c, d)
    ring = O.ring
    span: dict = {}
    for n in comp.degrees():
        vecs = []
        for x in comp.labels(n):
            for g in gens:
                gx = O.act_label(c, d, x, g)
                v = dict(gx)
                v[x] = ring.norm(v.get(x, 0) - 1)
                v = {k: w for k, w in v.items() if w}
                if v:
                    vecs.append(v)
        span[n] = vecs
    return quotient_by_subspace(comp, span)


def check_strong_equivalence(f: OperadMap, max_arity: int | None = None) -> EquivalenceReport:
    """Quasi-isomorphism on coinvariants by every product of symmetric groups
    permuting monochromatic blocks of inputs."""
    S, T = f.source, f.target
    A = S.max_arity if max_arity is None else min(max_arity, S.max_arity)
    rep = EquivalenceReport()
    for n in range(A + 1):
        for c, d in S.signatures(n):
            if S.component(c, d).is_zero() and T.component(f.image_colors(c), f.color_map[d]).is_zero():
                continue
            tc, td = f.image_colors(c), f.color_map[d]
            for blocks in set_partitions(range(n)):
                if any(len({c[i] for i in blk}) > 1 for blk in blocks):
                    continue
                gens = _block_generators(blocks, n)
                sq, sp = coinvariant_complex(S, c, d, gens)
                tq, tp = coinvariant_complex(T, tc, td, gens)
                fm = f.component_map(c, d)
                blocks_m = {}
                for k in sq.degrees():
                    sec = _section(sp, k)
                    blocks_m[k] = tp.block(k) @ fm.block(k) @ sec
                g = ChainMap(sq, tq, blocks_m, check=False)
                res = is_quasi_iso(g)
                rep.checked += 1
                if not res.ok:
                    rep.ok = False
                    rep.witness = {"component": (c, d), "blocks": blocks,
                                   "degree": res.witness_degree, "reason": res.reason}
                    return rep
    rep.condition_b = "automatic (bijective on colors)" if f.is_bijective_on_colors() else "unchecked"
    return rep


def _section(proj: ChainMap, k: int) -> Matrix:
    src, tgt = proj.source, proj.target
    ring = src.ring
    cols = []
    for lab in tgt.labels(k):
        if src.has_label(lab) and src.degree_of(lab) == k:
            cols.append({src.index(k, lab): ring.one})
        else:
            from opforge.exactlin import solve
            cols.append(solve(proj.block(k), {tgt.index(k, lab): ring.one}))
    return Matrix.from_columns(ring, src.dim(k), cols)


def stabilizer(c: Sequence) -> list[tuple]:
    n = len(c)
    return [s for s in itertools.permutations(range(n)) if act_on_colors(c, s) == tuple(c)]


def sigma_cofibrant_certificate(O: ColoredDgOperad, bases: Mapping | None = None,
                                max_arity: int | None = None) -> str:
    """``"certified"`` or ``"unknown"``; raises :class:`BadBasis` on a bad basis.

    Over a field of characteristic 0 every bounded complex of representations
    is projective.  Otherwise ``bases[(c, d)]`` must list labels whose orbits
    under the stabilizer of ``c`` form a basis of ``O(c, d)``.
    """
    ring = O.ring
    if ring.is_field and ring.characteristic == 0:
        return CERTIFIED
    if not bases:
        return UNKNOWN
    A = O.max_arity if max_arity is None else min(max_arity, O.max_arity)
    for n in range(A + 1):
        for c, d in O.nonzero_signatures(n):
            if (c, d) not in bases:
                return UNKNOWN
            comp = O.component(c, d)
            G = stabilizer(c)
            gens = list(bases[(c, d)])
            for k in comp.degrees():
                cols = []
                for x in gens:
                    if comp.degree_of(x) != k:
                        continue
                    for g in G:
                        cols.append(comp.to_coords(k, O.act_label(c, d, x, g)))
                m = Matrix.from_columns(ring, comp.dim(k), cols)
                if m.rows != m.cols or rank(m) != m.rows:
                    raise BadBasis(f"orbits of the basis of {(c, d)} are not a basis in degree {k}")
                if ring.kind == "Z" and any(v != 1 for v in smith_normal_form(m).invariant_factors):
                    raise BadBasis(f"orbit matrix of {(c, d)} is not unimodular in degree {k}")
    return CERTIFIED
