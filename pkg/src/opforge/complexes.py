"""Bounded cochain complexes of finite rank free modules.

Conventions: the differential raises degree (``d^n: X^n -> X^{n+1}``).  Each
degree carries a tuple of basis labels; labels are unique across the whole
complex, so a sparse vector ``{label: scalar}`` determines its degree.

The tensor product uses the Koszul rule
``d(x (x) y) = dx (x) y + (-1)^{|x|} x (x) dy`` and, for graded maps,
``(f (x) g)(x (x) y) = (-1)^{|g||x|} f(x) (x) g(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from opforge.exactlin import (
    Matrix, Ring, RingMismatch, ZZ, cokernel_presentation, kernel_basis,
    quotient_by_span, rank, smith_normal_form, solve, _Echelon, _as_field, _lift_vec,
)

__all__ = [
    "DgComplex", "GradedMap", "ChainMap", "HomologyReport", "QuasiIsoResult",
    "DSquaredNonzero", "NotDClosed", "NotAChainMap",
    "zero_complex", "unit_complex", "cone_of_identity", "mapping_cone",
    "tensor", "tensor_maps", "tensor_many", "shift", "direct_sum", "swap_map",
    "homology", "is_quasi_iso", "quotient_by_subspace", "lvec_add", "lvec_scale",
    "random_complex",
]

Label = Hashable
LVec = dict


class DSquaredNonzero(ValueError):
    def __init__(self, degree):
        super().__init__(f"d^2 != 0 starting in degree {degree}")
        self.degree = degree


class NotDClosed(ValueError):
    def __init__(self, degree, generator):
        super().__init__(f"span not d-closed: d of generator {generator} in degree {degree} leaves it")
        self.degree = degree
        self.generator = generator


class NotAChainMap(ValueError):
    def __init__(self, degree):
        super().__init__(f"map does not commute with d in degree {degree}")
        self.degree = degree


def lvec_add(ring: Ring, *vecs: Mapping, coeffs: Sequence | None = None) -> LVec:
    out: dict = {}
    norm = ring.norm
    for k, v in enumerate(vecs):
        c = 1 if coeffs is None else coeffs[k]
        for lab, x in v.items():
            out[lab] = out.get(lab, 0) + c * x
    return {l: y for l, y in ((l, norm(y)) for l, y in out.items()) if y}


def lvec_scale(ring: Ring, v: Mapping, c) -> LVec:
    c = ring(c)
    if not c:
        return {}
    return {l: ring.norm(x * c) for l, x in v.items()}


class DgComplex:
    """A bounded complex with labelled bases and cohomological differential."""

    def __init__(self, ring: Ring, basis: Mapping[int, Sequence[Label]],
                 diff: Mapping[int, Matrix] | None = None, check: bool = True):
        self.ring = ring
        self._basis = {int(n): tuple(b) for n, b in basis.items() if len(b)}
        self._index: dict[int, dict] = {}
        self._degree: dict = {}
        for n, b in self._basis.items():
            idx = {}
            for i, lab in enumerate(b):
                if lab in self._degree:
                    raise ValueError(f"duplicate basis label {lab!r}")
                idx[lab] = i
                self._degree[lab] = n
            self._index[n] = idx
        self._d: dict[int, Matrix] = {}
        for n, m in (diff or {}).items():
            n = int(n)
            if m.ring != ring:
                raise RingMismatch(f"differential in degree {n} over {m.ring}")
            if m.shape != (self.dim(n + 1), self.dim(n)):
                raise ValueError(
                    f"d^{n} has shape {m.shape}, expected {(self.dim(n + 1), self.dim(n))}")
            if not m.is_zero():
                self._d[n] = m
        if check:
            self.check()

    @classmethod
    def from_ranks(cls, ring, ranks: Mapping[int, int], diff=None, prefix="e", check=True):
        basis = {n: [(prefix, n, i) for i in range(r)] for n, r in ranks.items()}
        return cls(ring, basis, diff, check)

    # -- structure ----------------------------------------------------------
    def check(self):
        for n in sorted(self._d):
            nxt = self._d.get(n + 1)
            if nxt is not None and not (nxt @ self._d[n]).is_zero():
                raise DSquaredNonzero(n)

    def degrees(self) -> list[int]:
        return sorted(self._basis)

    @property
    def ranks(self) -> dict[int, int]:
        return {n: len(b) for n, b in sorted(self._basis.items())}

    def dim(self, n: int) -> int:
        return len(self._basis.get(n, ()))

    def total_rank(self) -> int:
        return sum(len(b) for b in self._basis.values())

    def labels(self, n: int) -> tuple:
        return self._basis.get(n, ())

    def all_labels(self):
        for n in self.degrees():
            yield from self._basis[n]

    def index(self, n: int, label) -> int:
        return self._index[n][label]

    def degree_of(self, label) -> int:
        return self._degree[label]

    def has_label(self, label) -> bool:
        return label in self._degree

    def d(self, n: int) -> Matrix:
        m = self._d.get(n)
        if m is None:
            return Matrix.zero(self.ring, self.dim(n + 1), self.dim(n))
        return m

    def differentials(self) -> dict[int, Matrix]:
        return dict(self._d)

    def euler_characteristic(self) -> int:
        return sum((-1) ** (n % 2) * len(b) for n, b in self._basis.items())

    # -- vectors ------------------------------------------------------------
    def to_coords(self, n: int, vec: Mapping) -> dict:
        idx = self._index.get(n, {})
        return {idx[l]: self.ring(x) for l, x in vec.items() if x}

    def from_coords(self, n: int, coords: Mapping[int, object]) -> LVec:
        b = self._basis.get(n, ())
        return {b[i]: x for i, x in coords.items() if x}

    def split_by_degree(self, vec: Mapping) -> dict[int, LVec]:
        out: dict[int, LVec] = {}
        for l, x in vec.items():
            if x:
                out.setdefault(self._degree[l], {})[l] = x
        return out

    def apply_d(self, vec: Mapping) -> LVec:
        out: LVec = {}
        for n, part in self.split_by_degree(vec).items():
            r = self.d(n).apply(self.to_coords(n, part))
            out.update(self.from_coords(n + 1, r))
        return out

    def is_zero(self) -> bool:
        return not self._basis

    def relabel(self, fn: Callable) -> "DgComplex":
        return DgComplex(self.ring, {n: [fn(l) for l in b] for n, b in self._basis.items()},
                         self._d, check=False)

    def same_as(self, other: "DgComplex") -> bool:
        """Equal bases (in order) and equal differentials."""
        return (self.ring == other.ring and self._basis == other._basis
                and self._d == other._d)

    def __eq__(self, other):
        if not isinstance(other, DgComplex):
            return NotImplemented
        return self.same_as(other)

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"DgComplex({self.ring}, ranks={self.ranks})"

    def homology(self) -> "HomologyReport":
        return homology(self)


# ---------------------------------------------------------------------------
# graded maps

class GradedMap:
    """A degree ``k`` map: ``blocks[n]`` sends source degree n to target degree n+k."""

    def __init__(self, source: DgComplex, target: DgComplex, degree: int,
                 blocks: Mapping[int, Matrix]):
        if source.ring != target.ring:
            raise RingMismatch("source and target rings differ")
        self.source, self.target, self.degree = source, target, degree
        self.ring = source.ring
        self._b: dict[int, Matrix] = {}
        for n, m in blocks.items():
            n = int(n)
            exp = (target.dim(n + degree), source.dim(n))
            if m.shape != exp:
                raise ValueError(f"block {n} has shape {m.shape}, expected {exp}")
            if not m.is_zero():
                self._b[n] = m

    @classmethod
    def from_function(cls, source, target, degree, fn: Callable[[Label], Mapping]):
        """Build from images of basis labels (``fn(label) -> {label: scalar}``)."""
        blocks = {}
        for n in source.degrees():
            cols = []
            for lab in source.labels(n):
                img = fn(lab)
                cols.append(target.to_coords(n + degree, img) if img else {})
            blocks[n] = Matrix.from_columns(source.ring, target.dim(n + degree), cols)
        return cls(source, target, degree, blocks)

    def block(self, n: int) -> Matrix:
        m = self._b.get(n)
        if m is None:
            return Matrix.zero(self.ring, self.target.dim(n + self.degree), self.source.dim(n))
        return m

    def blocks(self) -> dict[int, Matrix]:
        return dict(self._b)

    def apply(self, vec: Mapping) -> LVec:
        out: LVec = {}
        for n, part in self.source.split_by_degree(vec).items():
            r = self.block(n).apply(self.source.to_coords(n, part))
            for l, x in self.target.from_coords(n + self.degree, r).items():
                out[l] = x
        return out

    def image(self, label) -> LVec:
        return self.apply({label: self.ring.one})

    def _like(self, other):
        if self.source is not other.source and not self.source.same_as(other.source):
            raise ValueError("sources differ")
        if self.target is not other.target and not self.target.same_as(other.target):
            raise ValueError("targets differ")
        if self.degree != other.degree:
            raise ValueError("degrees differ")

    def __add__(self, other):
        self._like(other)
        ns = set(self._b) | set(other._b)
        return GradedMap(self.source, self.target, self.degree,
                         {n: self.block(n) + other.block(n) for n in ns})

    def __neg__(self):
        return GradedMap(self.source, self.target, self.degree, {n: -m for n, m in self._b.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return GradedMap(self.source, self.target, self.degree,
                         {n: m.scale(s) for n, m in self._b.items()})

    def __matmul__(self, other: "GradedMap") -> "GradedMap":
        """Composition ``self o other``."""
        blocks = {}
        for n, m in other._b.items():
            blocks[n] = self.block(n + other.degree) @ m
        return GradedMap(other.source, self.target, self.degree + other.degree, blocks)

    def __eq__(self, other):
        if not isinstance(other, GradedMap):
            return NotImplemented
        return (self.degree == other.degree and self.source.same_as(other.source)
                and self.target.same_as(other.target) and self._b == other._b)

    __hash__ = object.__hash__

    def is_zero(self):
        return not self._b

    def d_commutator(self) -> "GradedMap":
        """``d f - (-1)^{|f|} f d``."""
        k = self.degree
        blocks = {}
        for n in set(self.source.degrees()):
            left = self.target.d(n + k) @ self.block(n)
            right = self.block(n + 1) @ self.source.d(n)
            blocks[n] = left - right.scale((-1) ** (k % 2))
        return GradedMap(self.source, self.target, k + 1, blocks)

    def is_chain_map(self) -> bool:
        return self.d_commutator().is_zero()

    def first_noncommuting_degree(self):
        c = self.d_commutator()
        return min(c._b) if c._b else None

    def as_chain_map(self) -> "ChainMap":
        return ChainMap(self.source, self.target, self._b)

    def __repr__(self):
        return f"GradedMap(deg={self.degree}, {self.source!r} -> {self.target!r})"


class ChainMap(GradedMap):
    """A degree 0 map commuting with the differentials (checked)."""

    def __init__(self, source, target, blocks, check=True):
        super().__init__(source, target, 0, blocks)
        if check:
            bad = self.first_noncommuting_degree()
            if bad is not None:
                raise NotAChainMap(bad)

    @classmethod
    def from_function(cls, source, target, fn, degree=0, check=True):
        g = GradedMap.from_function(source, target, 0, fn)
        return cls(source, target, g._b, check=check)

    @classmethod
    def identity(cls, x: DgComplex) -> "ChainMap":
        return cls(x, x, {n: Matrix.identity(x.ring, x.dim(n)) for n in x.degrees()}, check=False)

    @classmethod
    def zero(cls, source, target) -> "ChainMap":
        return cls(source, target, {}, check=False)

    def __matmul__(self, other):
        g = GradedMap.__matmul__(self, other)
        if isinstance(other, ChainMap):
            return ChainMap(g.source, g.target, g._b, check=False)
        return g

    def __add__(self, other):
        g = GradedMap.__add__(self, other)
        return ChainMap(g.source, g.target, g._b, check=False) if isinstance(other, ChainMap) else g

    def __neg__(self):
        g = GradedMap.__neg__(self)
        return ChainMap(g.source, g.target, g._b, check=False)

    def scale(self, s):
        g = GradedMap.scale(self, s)
        return ChainMap(g.source, g.target, g._b, check=False)


# ---------------------------------------------------------------------------
# constructors

def zero_complex(ring) -> DgComplex:
    return DgComplex(ring, {})


def unit_complex(ring, degree: int = 0, label="1") -> DgComplex:
    """``k`` concentrated in one degree."""
    return DgComplex(ring, {degree: [label]})


def cone_of_identity(ring, degree: int = 0, labels=("x", "dx")) -> DgComplex:
    """Contractible complex with ``x`` in degree d and ``dx`` in degree d+1."""
    x, dx = labels
    return DgComplex(ring, {degree: [x], degree + 1: [dx]},
                     {degree: Matrix(ring, 1, 1, {(0, 0): 1})})


def shift(x: DgComplex, s: int) -> DgComplex:
    """Move degree n to n+s, multiplying the differential by (-1)^s."""
    sign = -1 if s % 2 else 1
    return DgComplex(x.ring, {n + s: b for n, b in x._basis.items()},
                     {n + s: m.scale(sign) for n, m in x._d.items()}, check=False)


def direct_sum(*cs: DgComplex, tags: Sequence | None = None) -> DgComplex:
    if not cs:
        raise ValueError("direct_sum needs at least one summand")
    ring = cs[0].ring
    for c in cs:
        if c.ring != ring:
            raise RingMismatch("summands over different rings")
    tags = list(range(len(cs))) if tags is None else list(tags)
    degs = sorted(set().union(*(c._basis for c in cs)))
    basis = {n: [(t, l) for t, c in zip(tags, cs) for l in c.labels(n)] for n in degs}
    diff = {}
    for n in degs:
        blocks = [c.d(n) for c in cs]
        if any(not b.is_zero() for b in blocks):
            diff[n] = Matrix.block_diag(ring, blocks)
    return DgComplex(ring, basis, diff, check=False)


def _tensor_layout(a: DgComplex, b: DgComplex):
    layout: dict[int, list] = {}
    for p in a.degrees():
        for q in b.degrees():
            layout.setdefault(p + q, []).append((p, q))
    return {n: sorted(v) for n, v in layout.items()}


def tensor(a: DgComplex, b: DgComplex) -> DgComplex:
    """Tensor product with basis labels ``(x, y)`` ordered by (|x|, x, y)."""
    if a.ring != b.ring:
        raise RingMismatch(f"{a.ring} vs {b.ring}")
    ring = a.ring
    layout = _tensor_layout(a, b)
    basis = {n: [(x, y) for p, q in pq for x in a.labels(p) for y in b.labels(q)]
             for n, pq in layout.items()}
    out = DgComplex(ring, basis, check=False)
    diff = {}
    for n, pq in layout.items():
        cols = []
        for p, q in pq:
            da, db = a.d(p), b.d(q)
            sign = -1 if p % 2 else 1
            for i, x in enumerate(a.labels(p)):
                dx = a.from_coords(p + 1, da.column(i))
                for j, y in enumerate(b.labels(q)):
                    col = {}
                    for x2, c in dx.items():
                        col[out.index(n + 1, (x2, y))] = c
                    dy = b.from_coords(q + 1, db.column(j))
                    for y2, c in dy.items():
                        k = out.index(n + 1, (x, y2))
                        col[k] = ring.norm(col.get(k, 0) + sign * c)
                    cols.append(col)
        m = Matrix.from_columns(ring, out.dim(n + 1), cols)
        if not m.is_zero():
            diff[n] = m
    return DgComplex(ring, basis, diff, check=False)


def tensor_many(cs: Sequence[DgComplex], ring: Ring | None = None) -> DgComplex:
    """Iterated tensor product with flat tuple labels ``(x_1, ..., x_n)``."""
    if not cs:
        if ring is None:
            raise ValueError("empty tensor product needs a ring")
        return DgComplex(ring, {0: [()]})
    out = cs[0].relabel(lambda l: (l,))
    for c in cs[1:]:
        out = tensor(out, c).relabel(lambda l: l[0] + (l[1],))
    return out


def tensor_maps(f: GradedMap, g: GradedMap, source: DgComplex | None = None,
                target: DgComplex | None = None) -> GradedMap:
    src = source or tensor(f.source, g.source)
    tgt = target or tensor(f.target, g.target)
    ring = f.ring
    gd = g.degree

    def img(lab):
        x, y = lab
        n = f.source.degree_of(x)
        fx = f.image(x)
        gy = g.image(y)
        if not fx or not gy:
            return {}
        s = -1 if (gd * n) % 2 else 1
        return {(a, b): ring.norm(s * u * v) for a, u in fx.items() for b, v in gy.items()}

    gm = GradedMap.from_function(src, tgt, f.degree + gd, img)
    if gm.degree == 0 and isinstance(f, ChainMap) and isinstance(g, ChainMap):
        return ChainMap(src, tgt, gm._b, check=False)
    return gm


def swap_map(a: DgComplex, b: DgComplex) -> ChainMap:
    """Symmetry ``x (x) y -> (-1)^{|x||y|} y (x) x``."""
    src, tgt = tensor(a, b), tensor(b, a)

    def img(lab):
        x, y = lab
        s = -1 if (a.degree_of(x) * b.degree_of(y)) % 2 else 1
        return {(y, x): s}

    return ChainMap.from_function(src, tgt, img, check=False)


def mapping_cone(f: ChainMap) -> DgComplex:
    """``Cone(f)^n = X^{n+1} + Y^n`` with ``d(x, y) = (-dx, f x + dy)``."""
    x, y = f.source, f.target
    ring = f.ring
    degs = sorted(set(n - 1 for n in x.degrees()) | set(y.degrees()))
    basis = {n: [("s", l) for l in x.labels(n + 1)] + [("t", l) for l in y.labels(n)]
             for n in degs}
    diff = {}
    for n in degs:
        top = Matrix.hstack(ring, x.dim(n + 2), [-x.d(n + 1), Matrix.zero(ring, x.dim(n + 2), y.dim(n))])
        bot = Matrix.hstack(ring, y.dim(n + 1), [f.block(n + 1), y.d(n)])
        m = Matrix.vstack(ring, x.dim(n + 1) + y.dim(n), [top, bot])
        if not m.is_zero():
            diff[n] = m
    return DgComplex(ring, basis, diff, check=False)


# ---------------------------------------------------------------------------
# homology

@dataclass(frozen=True)
class HomologyReport:
    ring: Ring
    groups: dict = field(default_factory=dict)   # degree -> (free_rank, torsion tuple)

    def free_rank(self, n):
        return self.groups.get(n, (0, ()))[0]

    def torsion(self, n):
        return self.groups.get(n, (0, ()))[1]

    def is_zero(self):
        return all(r == 0 and not t for r, t in self.groups.values())

    def nonzero_degrees(self):
        return sorted(n for n, (r, t) in self.groups.items() if r or t)

    def ranks(self):
        return {n: r for n, (r, t) in sorted(self.groups.items()) if r}

    def __str__(self):
        rows = []
        for n, (r, t) in sorted(self.groups.items()):
            tor = " + ".join(f"{self.ring.name}/{d}" for d in t)
            rows.append(f"H^{n}: rank {r}" + (f", torsion {tor}" if tor else ""))
        return "\n".join(rows) if rows else "H = 0"


def homology(x: DgComplex) -> HomologyReport:
    groups = {}
    ranks = {n: rank(m) for n, m in x._d.items()}
    for n in x.degrees():
        free = x.dim(n) - ranks.get(n, 0) - ranks.get(n - 1, 0)
        tors = ()
        if x.ring.kind == "Z" and (n - 1) in x._d:
            _, t = cokernel_presentation(x._d[n - 1])
            tors = tuple(t)
        groups[n] = (free, tors)
    return HomologyReport(x.ring, groups)


def _homology_basis(x: DgComplex, n: int):
    """Cycle representatives of a basis of H^n (field case) and the boundary echelon."""
    ring = x.ring
    ech = _Echelon(ring)
    for col in x.d(n - 1).columns():
        ech.add(col)
    nb = len(ech.rows)
    reps = []
    for col in kernel_basis(x.d(n)).columns():
        if ech.add(col):
            reps.append(col)
    return reps, nb


def _homology_coords(x: DgComplex, n: int, reps, z: dict) -> dict | None:
    """Coordinates of the class of the cycle ``z`` in the basis ``reps``."""
    ring = x.ring
    bmat = x.d(n - 1)
    cols = list(reps) + bmat.columns()
    a = Matrix.from_columns(ring, x.dim(n), cols)
    sol = solve(a, z)
    if sol is None:
        return None
    return {i: v for i, v in sol.items() if i < len(reps)}


@dataclass(frozen=True)
class QuasiIsoResult:
    ok: bool
    witness_degree: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def induced_on_homology(f: ChainMap, n: int) -> Matrix:
    """Matrix of ``H^n(f)`` in the chosen homology bases (field coefficients)."""
    if not f.ring.is_field:
        raise ValueError("induced homology matrices need a field")
    sreps, _ = _homology_basis(f.source, n)
    treps, _ = _homology_basis(f.target, n)
    cols = []
    for z in sreps:
        fz = f.block(n).apply(z)
        c = _homology_coords(f.target, n, treps, fz)
        if c is None:
            raise AssertionError("image of a cycle is not a cycle")
        cols.append(c)
    return Matrix.from_columns(f.ring, len(treps), cols)


def is_quasi_iso(f: ChainMap) -> QuasiIsoResult:
    """Decide whether ``f`` induces isomorphisms on all homology groups."""
    degs = sorted(set(f.source.degrees()) | set(f.target.degrees()))
    if f.ring.is_field:
        for n in degs:
            m = induced_on_homology(f, n)
            if m.rows != m.cols:
                return QuasiIsoResult(False, n, f"H^{n} ranks {m.cols} vs {m.rows}")
            if rank(m) != m.rows:
                return QuasiIsoResult(False, n, f"H^{n}(f) is singular")
        return QuasiIsoResult(True)
    return _quasi_iso_by_cone(f)


def _quasi_iso_by_cone(f: ChainMap) -> QuasiIsoResult:
    cone = mapping_cone(f)
    h = homology(cone)
    bad = h.nonzero_degrees()
    if not bad:
        return QuasiIsoResult(True)
    n = bad[0]
    # H^n(Cone) != 0 means coker H^n(f) != 0 or ker H^{n+1}(f) != 0
    y = f.target
    bmat = cone.d(n - 1)
    for z in kernel_basis(y.d(n)).columns():
        v = {cone.index(n, ("t", y.labels(n)[i])): c for i, c in z.items()}
        if solve(bmat, v) is None:
            return QuasiIsoResult(False, n, f"H^{n}(f) is not surjective")
    return QuasiIsoResult(False, n + 1, f"H^{n + 1}(f) is not injective")


# ---------------------------------------------------------------------------
# quotients

def quotient_by_subspace(x: DgComplex, span: Mapping[int, Iterable[Mapping]],
                         labels: Callable | None = None):
    """Quotient by the span of labelled vectors given per degree.

    Returns ``(quotient, projection)``.  Quotient labels are the surviving
    ambient labels when possible, otherwise ``("q", n, i)``.
    """
    ring = x.ring
    spans = {n: [x.to_coords(n, v) for v in vs] for n, vs in span.items()}
    # d-closedness.  Over Z rational membership suffices: every quotient below
    # is checked to be free, so each target span is saturated.
    field = _as_field(ring)
    for n, vs in spans.items():
        if not vs:
            continue
        d = x.d(n)
        ech = _Echelon(field)
        for t in spans.get(n + 1, []):
            ech.add(_lift_vec(ring, t))
        for v in vs:
            dv = d.apply(v)
            if dv and ech.reduce(_lift_vec(ring, dv)):
                raise NotDClosed(n, x.from_coords(n, v))
    quots = {n: quotient_by_span(ring, x.dim(n), spans.get(n, [])) for n in x.degrees()}
    basis = {}
    for n, q in quots.items():
        if q.kept is not None:
            basis[n] = [x.labels(n)[i] for i in q.kept]
        else:
            basis[n] = [("q", n, i) for i in range(q.rank)]
    if labels is not None:
        basis = {n: [labels(l) for l in b] for n, b in basis.items()}
    diff = {}
    for n, q in quots.items():
        if n + 1 in quots:
            m = quots[n + 1].proj @ x.d(n) @ q.section
            if not m.is_zero():
                diff[n] = m
    qx = DgComplex(ring, basis, diff, check=False)
    proj = ChainMap(x, qx, {n: q.proj for n, q in quots.items()}, check=False)
    return qx, proj


def random_complex(ring: Ring, rng, degrees: Sequence[int], max_rank: int = 2,
                   prefix: str = "e") -> DgComplex:
    """A seeded complex on ``degrees`` (ascending); each ``d^n`` lands in ``ker d^{n+1}``."""
    degrees = sorted(degrees)
    ranks = {n: rng.randint(0, max_rank) for n in degrees}
    basis = {n: [f"{prefix}{n}_{i}" for i in range(r)] for n, r in ranks.items()}
    diff: dict = {}
    for n in reversed(degrees):
        if n + 1 not in ranks or not ranks[n] or not ranks[n + 1]:
            continue
        nxt = diff.get(n + 1)
        if nxt is None:
            ker = Matrix.identity(ring, ranks[n + 1])
        else:
            ker = kernel_basis(nxt)
        if ker.cols == 0:
            continue
        coeff = Matrix.from_dense(ring, [[rng.randint(-2, 2) for _ in range(ranks[n])]
                                         for _ in range(ker.cols)])
        diff[n] = ker @ coeff
    return DgComplex(ring, basis, diff)

