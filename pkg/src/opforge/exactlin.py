"""Exact linear algebra over Q, Z and F_p.

Matrices are sparse and immutable.  Scalars are ``Fraction`` over Q and
plain ``int`` over Z and F_p (representatives in ``[0, p)``).  Everything
here is exact; there is no floating point anywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Ring", "QQ", "ZZ", "GF", "parse_ring",
    "Matrix", "SmithDecomposition", "Quotient", "CoinvariantResult",
    "WrongRing", "NotAnAction", "TorsionQuotient", "RingMismatch",
    "rank", "smith_normal_form", "kernel_basis", "image_basis",
    "cokernel_presentation", "quotient_by_span", "solve", "in_span",
    "group_coinvariants", "inverse",
]


class WrongRing(ValueError):
    pass


class RingMismatch(ValueError):
    pass


class NotAnAction(ValueError):
    pass


class TorsionQuotient(ValueError):
    """A quotient over Z is not a free module, so it is not a chain group."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class Ring:
    """Coefficient ring: ``"Q"``, ``"Z"`` or ``"Fp"`` with a prime ``p``."""

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind not in ("Q", "Z", "Fp"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "Fp":
            if not _is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")
            if self.p >= 2**31:
                raise ValueError("prime fields need p < 2^31")
        elif self.p:
            raise ValueError("only prime fields carry p")

    @property
    def name(self) -> str:
        return f"F{self.p}" if self.kind == "Fp" else self.kind

    def __repr__(self):
        return self.name

    @property
    def is_field(self) -> bool:
        return self.kind != "Z"

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "Fp" else 0

    def __call__(self, x):
        if self.kind == "Q":
            if isinstance(x, str):
                return Fraction(x)
            return x if type(x) is Fraction else Fraction(x)
        if self.kind == "Z":
            if isinstance(x, str):
                x = Fraction(x)
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def norm(self, x):
        """Reduce the result of plain Python arithmetic to canonical form."""
        if self.kind == "Fp":
            return x % self.p
        return x

    @property
    def zero(self):
        return Fraction(0) if self.kind == "Q" else 0

    @property
    def one(self):
        return Fraction(1) if self.kind == "Q" else 1

    def inv(self, a):
        if self.kind == "Q":
            return 1 / a
        if self.kind == "Fp":
            return pow(a, -1, self.p)
        if a in (1, -1):
            return a
        raise ZeroDivisionError(f"{a} is not a unit in Z")

    def fmt(self, a) -> str:
        return str(a)


QQ = Ring("Q")
ZZ = Ring("Z")


def GF(p: int) -> Ring:
    return Ring("Fp", p)


def parse_ring(text: str) -> Ring:
    """Parse ``Q``, ``Z``, ``F5`` or ``Fp:5``."""
    t = text.strip()
    if t in ("Q", "QQ"):
        return QQ
    if t in ("Z", "ZZ"):
        return ZZ
    if t.startswith("Fp:"):
        return GF(int(t[3:]))
    if t.startswith("F") and t[1:].isdigit():
        return GF(int(t[1:]))
    raise ValueError(f"cannot parse ring {text!r}")


class Matrix:
    """Sparse immutable matrix stored column by column."""

    __slots__ = ("ring", "rows", "cols", "_c")

    def __init__(self, ring: Ring, rows: int, cols: int,
                 entries: Mapping[tuple[int, int], object] | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        self.ring = ring
        self.rows = rows
        self.cols = cols
        c: dict[int, dict[int, object]] = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise IndexError(f"entry ({i},{j}) outside {rows}x{cols}")
                v = ring(v)
                if v:
                    c.setdefault(j, {})[i] = v
        self._c = c

    @classmethod
    def _raw(cls, ring, rows, cols, coldict):
        m = cls.__new__(cls)
        m.ring, m.rows, m.cols = ring, rows, cols
        m._c = {j: col for j, col in coldict.items() if col}
        return m

    @classmethod
    def zero(cls, ring, rows, cols):
        return cls._raw(ring, rows, cols, {})

    @classmethod
    def identity(cls, ring, n):
        one = ring.one
        return cls._raw(ring, n, n, {i: {i: one} for i in range(n)})

    @classmethod
    def from_dense(cls, ring, data: Sequence[Sequence], cols: int | None = None):
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        ent = {}
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ValueError("ragged dense matrix")
            for j, v in enumerate(row):
                if v:
                    ent[i, j] = v
        return cls(ring, rows, cols, ent)

    @classmethod
    def from_columns(cls, ring, rows: int, columns: Sequence[Mapping[int, object]]):
        cd = {}
        for j, col in enumerate(columns):
            cc = {}
            for i, v in col.items():
                if not 0 <= i < rows:
                    raise IndexError(i)
                v = ring(v)
                if v:
                    cc[i] = v
            if cc:
                cd[j] = cc
        return cls._raw(ring, rows, len(columns), cd)

    @classmethod
    def scalar(cls, ring, n, s):
        s = ring(s)
        if not s:
            return cls.zero(ring, n, n)
        return cls._raw(ring, n, n, {i: {i: s} for i in range(n)})

    # -- access -----------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, key):
        i, j = key
        return self._c.get(j, {}).get(i, self.ring.zero)

    def column(self, j) -> dict:
        return dict(self._c.get(j, {}))

    def columns(self) -> list[dict]:
        return [dict(self._c.get(j, {})) for j in range(self.cols)]

    def row_dicts(self) -> list[dict]:
        out = [dict() for _ in range(self.rows)]
        for j, col in self._c.items():
            for i, v in col.items():
                out[i][j] = v
        return out

    def entries(self):
        """Triplets ``(row, col, value)`` in canonical (row, col) order."""
        trip = [(i, j, v) for j, col in self._c.items() for i, v in col.items()]
        trip.sort(key=lambda t: (t[0], t[1]))
        return trip

    def nnz(self):
        return sum(len(c) for c in self._c.values())

    def to_dense(self):
        z = self.ring.zero
        out = [[z] * self.cols for _ in range(self.rows)]
        for j, col in self._c.items():
            for i, v in col.items():
                out[i][j] = v
        return out

    def is_zero(self):
        return not self._c

    def apply(self, vec: Mapping[int, object]) -> dict:
        """Multiply by a sparse column vector given as ``{index: scalar}``."""
        norm = self.ring.norm
        out: dict[int, object] = {}
        for j, x in vec.items():
            if not x:
                continue
            col = self._c.get(j)
            if not col:
                continue
            for i, v in col.items():
                out[i] = out.get(i, 0) + v * x
        return {i: w for i, w in ((i, norm(w)) for i, w in out.items()) if w}

    # -- arithmetic -------------------------------------------------------
    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cd = {}
        for j, col in other._c.items():
            r = self.apply(col)
            if r:
                cd[j] = r
        return Matrix._raw(self.ring, self.rows, other.cols, cd)

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        norm = self.ring.norm
        cd = {j: dict(c) for j, c in self._c.items()}
        for j, col in other._c.items():
            tgt = cd.setdefault(j, {})
            for i, v in col.items():
                w = norm(tgt.get(i, 0) + v)
                if w:
                    tgt[i] = w
                else:
                    tgt.pop(i, None)
        return Matrix._raw(self.ring, self.rows, self.cols, cd)

    def __neg__(self):
        norm = self.ring.norm
        return Matrix._raw(self.ring, self.rows, self.cols,
                           {j: {i: norm(-v) for i, v in c.items()} for j, c in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "Matrix":
        s = self.ring(s)
        if not s:
            return Matrix.zero(self.ring, self.rows, self.cols)
        norm = self.ring.norm
        return Matrix._raw(self.ring, self.rows, self.cols,
                           {j: {i: norm(v * s) for i, v in c.items()} for j, c in self._c.items()})

    @property
    def T(self) -> "Matrix":
        cd: dict[int, dict] = {}
        for j, col in self._c.items():
            for i, v in col.items():
                cd.setdefault(i, {})[j] = v
        return Matrix._raw(self.ring, self.cols, self.rows, cd)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.ring == other.ring and self.shape == other.shape
                and self._c == other._c)

    def __hash__(self):
        return hash((self.ring, self.shape, tuple(self.entries())))

    def __repr__(self):
        if self.rows * self.cols <= 64:
            return f"Matrix({self.ring}, {self.to_dense()})"
        return f"Matrix({self.ring}, {self.rows}x{self.cols}, nnz={self.nnz()})"

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        rpos = {r: k for k, r in enumerate(rows)}
        cd = {}
        for k, j in enumerate(cols):
            col = self._c.get(j)
            if col:
                cc = {rpos[i]: v for i, v in col.items() if i in rpos}
                if cc:
                    cd[k] = cc
        return Matrix._raw(self.ring, len(rows), len(cols), cd)

    @staticmethod
    def hstack(ring, rows, blocks: Sequence["Matrix"]) -> "Matrix":
        cd, off = {}, 0
        for b in blocks:
            if b.rows != rows:
                raise ValueError("hstack row mismatch")
            for j, col in b._c.items():
                cd[off + j] = dict(col)
            off += b.cols
        return Matrix._raw(ring, rows, off, cd)

    @staticmethod
    def vstack(ring, cols, blocks: Sequence["Matrix"]) -> "Matrix":
        cd: dict[int, dict] = {}
        off = 0
        for b in blocks:
            if b.cols != cols:
                raise ValueError("vstack column mismatch")
            for j, col in b._c.items():
                tgt = cd.setdefault(j, {})
                for i, v in col.items():
                    tgt[off + i] = v
            off += b.rows
        return Matrix._raw(ring, off, cols, cd)

    @staticmethod
    def block_diag(ring, blocks: Sequence["Matrix"]) -> "Matrix":
        cd, ro, co = {}, 0, 0
        for b in blocks:
            for j, col in b._c.items():
                cd[co + j] = {ro + i: v for i, v in col.items()}
            ro += b.rows
            co += b.cols
        return Matrix._raw(ring, ro, co, cd)

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product; basis pair ``(i, k)`` sits at ``i * other.rows + k``."""
        self._check(other)
        norm = self.ring.norm
        cd = {}
        for j, col in self._c.items():
            for l, ocol in other._c.items():
                cd[j * other.cols + l] = {
                    i * other.rows + k: norm(v * w)
                    for i, v in col.items() for k, w in ocol.items()}
        return Matrix._raw(self.ring, self.rows * other.rows, self.cols * other.cols, cd)


# ---------------------------------------------------------------------------
# elimination over fields

def _as_field(ring: Ring) -> Ring:
    return QQ if ring.kind == "Z" else ring


def _lift_vec(ring, vec):
    f = _as_field(ring)
    return {i: f(v) for i, v in vec.items() if v}


class _Echelon:
    """Incremental echelon basis; the pivot of a row is its largest index."""

    def __init__(self, field: Ring):
        self.field = field
        self.rows: dict[int, dict] = {}

    def reduce(self, v: dict) -> dict:
        v = dict(v)
        norm = self.field.norm
        while v:
            p = max(v)
            row = self.rows.get(p)
            if row is None:
                return v
            c = v[p]
            for i, x in row.items():
                w = norm(v.get(i, 0) - c * x)
                if w:
                    v[i] = w
                else:
                    v.pop(i, None)
        return v

    def reduce_full(self, v: dict) -> dict:
        """Clear every pivot coordinate, not only the leading one."""
        v = dict(v)
        norm = self.field.norm
        for p in sorted((q for q in v if q in self.rows), reverse=True):
            c = v.get(p)
            if not c:
                continue
            for i, x in self.rows[p].items():
                w = norm(v.get(i, 0) - c * x)
                if w:
                    v[i] = w
                else:
                    v.pop(i, None)
        return v

    def add(self, v: dict) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        p = max(v)
        inv = self.field.inv(v[p])
        norm = self.field.norm
        self.rows[p] = {i: norm(x * inv) for i, x in v.items()}
        return True

    def reduced_rows(self) -> dict[int, dict]:
        """Fully reduced rows keyed by pivot."""
        norm = self.field.norm
        out: dict[int, dict] = {}
        for p in sorted(self.rows):
            row = dict(self.rows[p])
            for q in sorted((q for q in row if q != p and q in out), reverse=True):
                c = row.get(q)
                if not c:
                    continue
                for i, x in out[q].items():
                    w = norm(row.get(i, 0) - c * x)
                    if w:
                        row[i] = w
                    else:
                        row.pop(i, None)
            out[p] = row
        return out


def rank(m: Matrix) -> int:
    """Rank over the fraction field of the coefficient ring."""
    ech = _Echelon(_as_field(m.ring))
    r = 0
    for col in m.columns():
        if ech.add(_lift_vec(m.ring, col)):
            r += 1
    return r


def image_basis(m: Matrix) -> list[dict]:
    """Independent columns spanning the column space (over the fraction field)."""
    ech = _Echelon(_as_field(m.ring))
    out = []
    for col in m.columns():
        if ech.add(_lift_vec(m.ring, col)):
            out.append(col)
    return out


def _field_kernel(m: Matrix) -> list[dict]:
    field = m.ring
    ech = _Echelon(field)
    # row-reduce the rows; the pivot of a row is its largest column index
    for row in m.row_dicts():
        ech.add(row)
    red = ech.reduced_rows()
    pivots = set(red)
    out = []
    for j in range(m.cols):
        if j in pivots:
            continue
        v = {j: field.one}
        for p, row in red.items():
            c = row.get(j)
            if c:
                v[p] = field.norm(-c)
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# Smith normal form over Z

@dataclass(frozen=True)
class SmithDecomposition:
    """``left @ original @ right`` is diagonal with ``invariant_factors``."""

    invariant_factors: tuple[int, ...]
    left: Matrix
    right: Matrix

    def diagonal(self, rows, cols) -> Matrix:
        return Matrix(ZZ, rows, cols, {(i, i): d for i, d in enumerate(self.invariant_factors)})


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def smith_normal_form(m: Matrix) -> SmithDecomposition:
    if m.ring.kind != "Z":
        raise WrongRing(f"Smith normal form needs Z, got {m.ring}")
    rows, cols = m.rows, m.cols
    A = m.to_dense()
    L = [[int(i == j) for j in range(rows)] for i in range(rows)]
    # R is kept transposed so that column operations become row operations
    Rt = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def row_comb(M, i, k, a, b, c, d):
        # (row_i, row_k) <- (a*row_i + b*row_k, c*row_i + d*row_k)
        ri, rk = M[i], M[k]
        M[i] = [a * x + b * y for x, y in zip(ri, rk)]
        M[k] = [c * x + d * y for x, y in zip(ri, rk)]

    def col_comb(i, k, a, b, c, d):
        for row in A:
            x, y = row[i], row[k]
            row[i], row[k] = a * x + b * y, c * x + d * y
        row_comb(Rt, i, k, a, b, c, d)

    t = 0
    factors = []
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = A[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        _, i, j = best
        if i != t:
            A[t], A[i] = A[i], A[t]
            L[t], L[i] = L[i], L[t]
        if j != t:
            col_comb(t, j, 0, 1, 1, 0)
        while True:
            changed = False
            for i in range(t + 1, rows):
                b = A[i][t]
                if not b:
                    continue
                a = A[t][t]
                if b % a == 0:
                    q = b // a
                    row_comb(A, t, i, 1, 0, -q, 1)
                    row_comb(L, t, i, 1, 0, -q, 1)
                else:
                    g, x, y = _xgcd(a, b)
                    row_comb(A, t, i, x, y, -b // g, a // g)
                    row_comb(L, t, i, x, y, -b // g, a // g)
                    changed = True
            for j in range(t + 1, cols):
                b = A[t][j]
                if not b:
                    continue
                a = A[t][t]
                if b % a == 0:
                    q = b // a
                    col_comb(t, j, 1, 0, -q, 1)
                else:
                    g, x, y = _xgcd(a, b)
                    col_comb(t, j, x, y, -b // g, a // g)
                    changed = True
            if changed:
                continue
            a = A[t][t]
            bad = None
            for i in range(t + 1, rows):
                if any(A[i][j] % a for j in range(t + 1, cols)):
                    bad = i
                    break
            if bad is None:
                break
            row_comb(A, t, bad, 1, 1, 0, 1)
            row_comb(L, t, bad, 1, 1, 0, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            L[t] = [-x for x in L[t]]
        factors.append(A[t][t])
        t += 1
    right = Matrix.from_dense(ZZ, Rt, cols).T if cols else Matrix.zero(ZZ, 0, 0)
    left = Matrix.from_dense(ZZ, L, rows) if rows else Matrix.zero(ZZ, 0, 0)
    return SmithDecomposition(tuple(factors), left, right)


def inverse(m: Matrix) -> Matrix:
    """Inverse of a square matrix; over Z the matrix must be unimodular."""
    if m.rows != m.cols:
        raise ValueError("inverse of a non-square matrix")
    n = m.rows
    field = _as_field(m.ring)
    rows = [dict(r) for r in m.row_dicts()]
    aug = []
    for i, r in enumerate(rows):
        v = {j: field(x) for j, x in r.items()}
        v[n + i] = field.one
        aug.append(v)
    # Gauss-Jordan with the pivot at the smallest column
    norm = field.norm
    for c in range(n):
        piv = next((k for k in range(c, n) if aug[k].get(c)), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = field.inv(aug[c][c])
        aug[c] = {j: norm(x * inv) for j, x in aug[c].items()}
        for k in range(n):
            if k != c and aug[k].get(c):
                f = aug[k][c]
                row = aug[k]
                for j, x in aug[c].items():
                    w = norm(row.get(j, 0) - f * x)
                    if w:
                        row[j] = w
                    else:
                        row.pop(j, None)
    ent = {}
    for i in range(n):
        for j, x in aug[i].items():
            if j >= n:
                ent[i, j - n] = x
    return Matrix(m.ring, n, n, ent)


def kernel_basis(m: Matrix) -> Matrix:
    """Columns form a basis of the kernel (over Z: of the kernel lattice)."""
    if m.ring.kind == "Z":
        snf = smith_normal_form(m)
        r = len(snf.invariant_factors)
        return snf.right.submatrix(range(m.cols), range(r, m.cols))
    return Matrix.from_columns(m.ring, m.cols, _field_kernel(m))


def cokernel_presentation(m: Matrix) -> tuple[int, list]:
    """``coker(m) = R^free_rank + sum R/(d)`` for the returned torsion list."""
    if m.ring.kind == "Z":
        snf = smith_normal_form(m)
        f = snf.invariant_factors
        return m.rows - len(f), [d for d in f if d != 1]
    return m.rows - rank(m), []


# ---------------------------------------------------------------------------
# quotients

@dataclass(frozen=True)
class Quotient:
    """A free quotient ``R^ambient / span`` with projection and section.

    When ``kept`` is set the quotient basis is the set of ambient coordinates
    ``kept`` and ``section`` is the coordinate inclusion.
    """

    ring: Ring
    ambient: int
    rank: int
    proj: Matrix
    section: Matrix
    kept: tuple[int, ...] | None


def _pivot_quotient(ring, ambient, red: dict[int, dict]) -> Quotient:
    kept = tuple(i for i in range(ambient) if i not in red)
    pos = {i: k for k, i in enumerate(kept)}
    norm = ring.norm
    cd = {}
    for i in range(ambient):
        if i in pos:
            cd[i] = {pos[i]: ring.one}
        else:
            col = {pos[j]: norm(-x) for j, x in red[i].items() if j != i}
            if col:
                cd[i] = col
    proj = Matrix._raw(ring, len(kept), ambient, cd)
    sec = Matrix._raw(ring, ambient, len(kept), {k: {i: ring.one} for k, i in enumerate(kept)})
    return Quotient(ring, ambient, len(kept), proj, sec, kept)


def _unit_pivot_lattice(vectors: Iterable[Mapping[int, int]]) -> bool:
    """Whether the integer echelon form of the Z-span of ``vectors`` (pivots at
    the largest index) has all pivots equal to 1 up to sign."""
    rows: dict[int, dict] = {}
    for v in vectors:
        v = {i: int(x) for i, x in v.items() if x}
        while v:
            p = max(v)
            row = rows.get(p)
            if row is None:
                if v[p] < 0:
                    v = {i: -x for i, x in v.items()}
                rows[p] = v
                break
            a, b = row[p], v[p]
            if b % a == 0:
                q = b // a
                v = {i: x for i, x in _axpy(v, -q, row).items() if x}
                continue
            g, s, t = _xgcd(a, b)
            new = {i: x for i, x in _axpy(_scale(row, s), t, v).items() if x}
            rest = {i: x for i, x in _axpy(_scale(v, a // g), -(b // g), row).items() if x}
            rows[p] = new
            v = rest
    return all(abs(r[p]) == 1 for p, r in rows.items())


def _scale(v: Mapping[int, int], c: int) -> dict:
    return {i: c * x for i, x in v.items()}


def _axpy(y: Mapping[int, int], c: int, x: Mapping[int, int]) -> dict:
    out = dict(y)
    for i, u in x.items():
        out[i] = out.get(i, 0) + c * u
    return out


def quotient_by_span(ring: Ring, ambient: int, vectors: Iterable[Mapping[int, object]]) -> Quotient:
    """Quotient of ``ring^ambient`` by the span of ``vectors``.

    Over a field the kept coordinates are the non-pivots, pivots being taken
    at the largest index, so low-index basis vectors survive.  Over Z the
    quotient must be free; otherwise :class:`TorsionQuotient` is raised.
    """
    vectors = [dict(v) for v in vectors if v]
    field = _as_field(ring)
    ech = _Echelon(field)
    for v in vectors:
        ech.add(_lift_vec(ring, v))
    red = ech.reduced_rows()
    if ring.is_field:
        return _pivot_quotient(ring, ambient, red)
    integral = all(x.denominator == 1 for row in red.values() for x in row.values())
    if integral:
        red_z = {p: {i: int(x) for i, x in row.items()} for p, row in red.items()}
        if _unit_pivot_lattice(vectors):
            return _pivot_quotient(ring, ambient, red_z)
        pivots = sorted(red_z)
        # coordinates of the spanning vectors in the echelon basis
        coords = Matrix(ZZ, len(pivots), len(vectors),
                        {(k, j): v.get(p, 0) for j, v in enumerate(vectors)
                         for k, p in enumerate(pivots) if v.get(p, 0)})
        f = smith_normal_form(coords).invariant_factors
        if all(d == 1 for d in f):
            return _pivot_quotient(ring, ambient, red_z)
        raise TorsionQuotient(f"quotient has torsion {[d for d in f if d != 1]}")
    span = Matrix.from_columns(ZZ, ambient, vectors)
    snf = smith_normal_form(span)
    f = snf.invariant_factors
    if any(d != 1 for d in f):
        raise TorsionQuotient(f"quotient has torsion {[d for d in f if d != 1]}")
    r = len(f)
    proj = snf.left.submatrix(range(r, ambient), range(ambient))
    sec = inverse(snf.left).submatrix(range(ambient), range(r, ambient))
    return Quotient(ring, ambient, ambient - r, proj, sec, None)


def solve(a: Matrix, b: Mapping[int, object]):
    """Some ``x`` with ``a @ x = b`` as a sparse dict, or ``None``."""
    ring = a.ring
    if ring.kind == "Z":
        snf = smith_normal_form(a)
        lb = snf.left.apply(b)
        y = {}
        for i, v in lb.items():
            if i < len(snf.invariant_factors):
                d = snf.invariant_factors[i]
                if v % d:
                    return None
                y[i] = v // d
            else:
                return None
        return snf.right.apply(y)
    norm = ring.norm
    rows: dict[int, tuple[dict, dict]] = {}

    def axpy(y, k, x):
        for i, v in x.items():
            w = norm(y.get(i, 0) - k * v)
            if w:
                y[i] = w
            else:
                y.pop(i, None)

    for j, col in enumerate(a.columns()):
        v, c = dict(col), {j: ring.one}
        while v:
            p = max(v)
            if p not in rows:
                inv = ring.inv(v[p])
                rows[p] = ({i: norm(x * inv) for i, x in v.items()},
                           {i: norm(x * inv) for i, x in c.items()})
                break
            k = v[p]
            axpy(v, k, rows[p][0])
            axpy(c, k, rows[p][1])
    v = {i: ring(x) for i, x in b.items() if x}
    sol: dict = {}
    while v:
        p = max(v)
        if p not in rows:
            return None
        k = v[p]
        axpy(v, k, rows[p][0])
        axpy(sol, -k, rows[p][1])
    return sol


def in_span(ring: Ring, ambient: int, vectors: Sequence[Mapping[int, object]], v) -> bool:
    a = Matrix.from_columns(ring, ambient, list(vectors))
    return solve(a, v) is not None


# ---------------------------------------------------------------------------
# group coinvariants

@dataclass(frozen=True)
class CoinvariantResult:
    projection: Matrix
    free_rank: int
    torsion: tuple
    quotient: Quotient | None


def _word_matrix(action, word, n, ring):
    m = Matrix.identity(ring, n)
    for g in word:
        m = m @ action[g]
    return m


def group_coinvariants(action: Mapping[str, Matrix], relations: Sequence[Sequence[str]],
                       ambient_rank: int) -> CoinvariantResult:
    """Coinvariants ``R^n / span{g x - x}`` of a presented finite group action.

    ``relations`` are words in the generator names that must act trivially.
    """
    if not action:
        ring = QQ
    else:
        ring = next(iter(action.values())).ring
    for g, m in action.items():
        if m.shape != (ambient_rank, ambient_rank):
            raise NotAnAction(f"generator {g} has shape {m.shape}")
    ident = Matrix.identity(ring, ambient_rank)
    for word in relations:
        if _word_matrix(action, word, ambient_rank, ring) != ident:
            raise NotAnAction(f"relation {' '.join(word)} does not act trivially")
    spans = []
    for g, m in action.items():
        spans.extend((m - ident).columns())
    span = Matrix.from_columns(ring, ambient_rank, spans) if spans else Matrix.zero(ring, ambient_rank, 0)
    free_rank, torsion = cokernel_presentation(span)
    if torsion:
        snf = smith_normal_form(span)
        r1 = sum(1 for d in snf.invariant_factors if d == 1)
        proj = snf.left.submatrix(range(r1, ambient_rank), range(ambient_rank))
        return CoinvariantResult(proj, free_rank, tuple(torsion), None)
    q = quotient_by_span(ring, ambient_rank, spans)
    return CoinvariantResult(q.proj, q.rank, (), q)
