"""Truncated simplicial modules, finite simplicial sets and the Dold-Kan pair.

Normalized chains put level m in cohomological degree -m, so everything here
lives in degrees [-n_max, 0].  Monotone maps [m] -> [n] are tuples of length
m+1; ``delta(n, i)`` skips i and ``sigma(n, j)`` repeats j.
"""

from __future__ import annotations

import itertools
from functools import cached_property
from typing import Callable, Hashable, Mapping, Sequence

from opforge.complexes import ChainMap, DgComplex, GradedMap, quotient_by_subspace, tensor
from opforge.exactlin import Matrix, Ring, solve

__all__ = [
    "SimplicialModule", "SimplicialMap", "FiniteSimplicialSet", "SimplicialIdentityError",
    "OutOfWindow", "CharNotZero", "PolyForms",
    "delta", "sigma", "surjections", "shuffles",
    "free_module", "normalized_chains", "dold_kan_inverse", "tensor_simplicial",
    "eilenberg_maclane", "alexander_whitney", "chains_of_simplicial_set",
    "standard_simplex", "boundary_of_simplex", "point", "sphere0", "nerve",
    "omega_forms", "truncate_above", "chains_of_map",
    "check_aw_em", "check_em_symmetry", "check_aw_coassociativity", "dold_kan_unit",
    "check_dold_kan_roundtrip", "check_polyforms",
]


class SimplicialIdentityError(ValueError):
    pass


class OutOfWindow(ValueError):
    pass


class CharNotZero(ValueError):
    pass


def delta(n: int, i: int) -> tuple:
    """Coface [n-1] -> [n] missing i."""
    return tuple(j if j < i else j + 1 for j in range(n))


def sigma(n: int, j: int) -> tuple:
    """Codegeneracy [n+1] -> [n] hitting j twice."""
    return tuple(k if k <= j else k - 1 for k in range(n + 2))


def compose(f: Sequence[int], g: Sequence[int]) -> tuple:
    """``f o g`` for monotone maps as tuples."""
    return tuple(f[k] for k in g)


def epi_mono(f: Sequence[int]):
    """Factor a monotone map as ``mono o epi``; returns (epi, mono)."""
    im = sorted(set(f))
    pos = {v: k for k, v in enumerate(im)}
    return tuple(pos[v] for v in f), tuple(im)


def surjections(n: int, k: int):
    """Monotone surjections [n] -> [k] as tuples, in lexicographic order."""
    # choose the k jump positions among 1..n
    for jumps in itertools.combinations(range(1, n + 1), k):
        out, v = [], 0
        js = set(jumps)
        for t in range(n + 1):
            if t in js:
                v += 1
            out.append(v)
        yield tuple(out)


def shuffles(p: int, q: int):
    """Pairs ``(mu, nu, sign)`` of (p,q)-shuffles of {0, ..., p+q-1}."""
    total = p + q
    for mu in itertools.combinations(range(total), p):
        ms = set(mu)
        nu = tuple(k for k in range(total) if k not in ms)
        seq = mu + nu
        inv = sum(1 for a in range(total) for b in range(a + 1, total) if seq[a] > seq[b])
        yield mu, nu, -1 if inv % 2 else 1


class SimplicialModule:
    """Levels 0..n_max with tabulated faces ``d_i`` and degeneracies ``s_j``.

    ``faces[m, i]`` maps level m to m-1; ``degeneracies[m, j]`` maps level m
    to m+1 (only for m < n_max).
    """

    def __init__(self, ring: Ring, labels: Mapping[int, Sequence[Hashable]],
                 faces: Mapping[tuple, Matrix], degeneracies: Mapping[tuple, Matrix],
                 n_max: int, check: bool = True):
        self.ring = ring
        self.n_max = n_max
        self._labels = {m: tuple(labels.get(m, ())) for m in range(n_max + 1)}
        self._faces = dict(faces)
        self._degens = dict(degeneracies)
        for m in range(1, n_max + 1):
            for i in range(m + 1):
                f = self._faces.get((m, i))
                if f is None:
                    f = self._faces[(m, i)] = Matrix.zero(ring, self.rank(m - 1), self.rank(m))
                if f.shape != (self.rank(m - 1), self.rank(m)):
                    raise ValueError(f"face d_{i} on level {m} has shape {f.shape}")
        for m in range(n_max):
            for j in range(m + 1):
                s = self._degens.get((m, j))
                if s is None:
                    s = self._degens[(m, j)] = Matrix.zero(ring, self.rank(m + 1), self.rank(m))
                if s.shape != (self.rank(m + 1), self.rank(m)):
                    raise ValueError(f"degeneracy s_{j} on level {m} has shape {s.shape}")
        if check:
            self.check_identities()

    def rank(self, m: int) -> int:
        return len(self._labels.get(m, ()))

    def labels(self, m: int) -> tuple:
        return self._labels[m]

    def face(self, m: int, i: int) -> Matrix:
        return self._faces[(m, i)]

    def degeneracy(self, m: int, j: int) -> Matrix:
        return self._degens[(m, j)]

    def level_ranks(self) -> list[int]:
        return [self.rank(m) for m in range(self.n_max + 1)]

    def check_identities(self):
        ring = self.ring
        for m in range(2, self.n_max + 1):
            for j in range(m + 1):
                for i in range(j):
                    if self.face(m - 1, i) @ self.face(m, j) != self.face(m - 1, j - 1) @ self.face(m, i):
                        raise SimplicialIdentityError(f"d_{i} d_{j} != d_{j - 1} d_{i} on level {m}")
        for m in range(self.n_max):
            ident = Matrix.identity(ring, self.rank(m))
            for j in range(m + 1):
                s = self.degeneracy(m, j)
                for i in range(m + 2):
                    lhs = self.face(m + 1, i) @ s
                    if i < j:
                        rhs = self.degeneracy(m - 1, j - 1) @ self.face(m, i)
                    elif i in (j, j + 1):
                        rhs = ident
                    else:
                        rhs = self.degeneracy(m - 1, j) @ self.face(m, i - 1)
                    if lhs != rhs:
                        raise SimplicialIdentityError(f"d_{i} s_{j} identity fails on level {m}")
        for m in range(self.n_max - 1):
            for j in range(m + 1):
                for i in range(j + 1):
                    if (self.degeneracy(m + 1, i) @ self.degeneracy(m, j)
                            != self.degeneracy(m + 1, j + 1) @ self.degeneracy(m, i)):
                        raise SimplicialIdentityError(f"s_{i} s_{j} identity fails on level {m}")

    def act(self, theta: Sequence[int], m: int, vec: Mapping[int, object]) -> dict:
        """Apply ``theta^*`` for a monotone ``theta: [k] -> [m]`` to a level-m coordinate vector."""
        epi, mono = epi_mono(theta)
        v = dict(vec)
        # mono: remove missing indices from the top down
        missing = [i for i in range(m + 1) if i not in set(mono)]
        lvl = m
        for i in reversed(missing):
            v = self.face(lvl, i).apply(v)
            lvl -= 1
        # epi: [k] -> [lvl]; repeated values give degeneracies, applied bottom up
        k = len(epi) - 1
        if k > self.n_max:
            raise OutOfWindow(f"level {k} exceeds truncation {self.n_max}")
        reps = [t for t in range(k) if epi[t] == epi[t + 1]]
        for t in reps:
            v = self.degeneracy(lvl, t).apply(v)
            lvl += 1
        return v

    # -- chains ---------------------------------------------------------------
    def moore_complex(self) -> DgComplex:
        ring = self.ring
        diff = {}
        for m in range(1, self.n_max + 1):
            acc = Matrix.zero(ring, self.rank(m - 1), self.rank(m))
            for i in range(m + 1):
                f = self.face(m, i)
                acc = acc + (f if i % 2 == 0 else -f)
            diff[-m] = acc
        return DgComplex(ring, {-m: self._labels[m] for m in range(self.n_max + 1)}, diff)

    @cached_property
    def _normalization(self):
        moore = self.moore_complex()
        span = {}
        for m in range(1, self.n_max + 1):
            vecs = []
            for j in range(m):
                for c in self.degeneracy(m - 1, j).columns():
                    if c:
                        vecs.append(moore.from_coords(-m, c))
            span[-m] = vecs
        cx, proj = quotient_by_subspace(moore, span)
        sections = {}
        for m in range(self.n_max + 1):
            sections[m] = _section_of(moore, cx, proj, -m)
        return moore, cx, proj, sections

    def normalized(self) -> DgComplex:
        return self._normalization[1]

    def __repr__(self):
        return f"SimplicialModule({self.ring}, levels={self.level_ranks()})"


def _section_of(moore, cx, proj, n) -> Matrix:
    """A section of the projection at degree n (basis labels of cx are ambient labels when possible)."""
    ring = moore.ring
    cols = []
    for lab in cx.labels(n):
        if moore.has_label(lab):
            cols.append({moore.index(n, lab): ring.one})
        else:
            cols.append(None)
    if all(c is not None for c in cols):
        return Matrix.from_columns(ring, moore.dim(n), cols)
    # labels were synthesized; rebuild a section from the projection
    p = proj.block(n)
    out = []
    for k in range(cx.dim(n)):
        x = solve(p, {k: ring.one})
        out.append(x)
    return Matrix.from_columns(ring, moore.dim(n), out)


class SimplicialMap:
    def __init__(self, source: SimplicialModule, target: SimplicialModule,
                 blocks: Mapping[int, Matrix], check=True):
        self.source, self.target = source, target
        self.blocks = {m: blocks.get(m, Matrix.zero(source.ring, target.rank(m), source.rank(m)))
                       for m in range(min(source.n_max, target.n_max) + 1)}
        if check:
            for m, f in self.blocks.items():
                for i in range(m + 1):
                    if m >= 1 and self.blocks[m - 1] @ source.face(m, i) != target.face(m, i) @ f:
                        raise SimplicialIdentityError(f"map does not commute with d_{i} on level {m}")
                if m + 1 in self.blocks:
                    for j in range(m + 1):
                        if self.blocks[m + 1] @ source.degeneracy(m, j) != target.degeneracy(m, j) @ f:
                            raise SimplicialIdentityError(f"map does not commute with s_{j} on level {m}")


def chains_of_map(f: SimplicialMap) -> ChainMap:
    sm, scx, _, ssec = f.source._normalization
    tm, tcx, tproj, _ = f.target._normalization
    blocks = {}
    for m, b in f.blocks.items():
        blocks[-m] = tproj.block(-m) @ b @ ssec[m]
    return ChainMap(scx, tcx, blocks)


def normalized_chains(M: SimplicialModule) -> DgComplex:
    """Quotient of the Moore complex by degenerate simplices, degree -m at level m."""
    return M.normalized()


def truncate_above(x: DgComplex, lo: int) -> DgComplex:
    """Subcomplex of degrees >= lo."""
    keep = [n for n in x.degrees() if n >= lo]
    return DgComplex(x.ring, {n: x.labels(n) for n in keep},
                     {n: x.d(n) for n in keep}, check=False)


def tensor_simplicial(M: SimplicialModule, N: SimplicialModule) -> SimplicialModule:
    """Levelwise tensor product with labels ``(a, b)``."""
    n_max = min(M.n_max, N.n_max)
    labels = {m: [(a, b) for a in M.labels(m) for b in N.labels(m)] for m in range(n_max + 1)}
    faces = {(m, i): M.face(m, i).kron(N.face(m, i)) for m in range(1, n_max + 1) for i in range(m + 1)}
    degs = {(m, j): M.degeneracy(m, j).kron(N.degeneracy(m, j)) for m in range(n_max) for j in range(m + 1)}
    return SimplicialModule(M.ring, labels, faces, degs, n_max, check=False)


def swap_simplicial(M: SimplicialModule, N: SimplicialModule) -> SimplicialMap:
    MN, NM = tensor_simplicial(M, N), tensor_simplicial(N, M)
    blocks = {}
    for m in range(MN.n_max + 1):
        idx = {l: k for k, l in enumerate(NM.labels(m))}
        blocks[m] = Matrix.from_columns(M.ring, NM.rank(m), [{idx[(b, a)]: 1} for a, b in MN.labels(m)])
    return SimplicialMap(MN, NM, blocks, check=False)


# ---------------------------------------------------------------------------
# Dold-Kan inverse

def dold_kan_inverse(X: DgComplex, n_max: int | None = None) -> SimplicialModule:
    """The simplicial module with level n spanned by ``(s, x)``, s: [n] ->> [k], x in X^{-k}.

    A monotone ``theta`` acts on ``(s, x)`` by factoring ``s o theta = mono o epi``
    and sending it to ``(epi, mono^* x)``, where ``mono^*`` is the identity for
    ``mono = id``, the differential for the coface missing 0, and zero otherwise.
    """
    if any(n > 0 for n in X.degrees()):
        raise OutOfWindow("complex must live in nonpositive degrees")
    lowest = -min(X.degrees()) if X.degrees() else 0
    if n_max is None:
        n_max = lowest
    if lowest > n_max:
        raise OutOfWindow(f"degree {-lowest} below truncation {n_max}")
    ring = X.ring
    labels = {}
    for n in range(n_max + 1):
        labs = []
        for k in range(n, -1, -1):
            for s in surjections(n, k):
                labs.extend((s, x) for x in X.labels(-k))
        labels[n] = labs
    index = {n: {l: i for i, l in enumerate(ls)} for n, ls in labels.items()}

    def act(theta, n):
        rows = len(labels[len(theta) - 1])
        cols = []
        for s, x in labels[n]:
            k = s[-1]
            epi, mono = epi_mono(compose(s, theta))
            lvl = len(theta) - 1
            tgt = index[lvl]
            if len(mono) == k + 1:
                cols.append({tgt[(epi, x)]: 1})
            elif len(mono) == k and mono == delta(k, 0):
                dx = X.apply_d({x: 1})
                cols.append({tgt[(epi, y)]: c for y, c in dx.items()})
            else:
                cols.append({})
        return Matrix.from_columns(ring, rows, cols)

    faces = {(n, i): act(delta(n, i), n) for n in range(1, n_max + 1) for i in range(n + 1)}
    degs = {(n, j): act(sigma(n, j), n) for n in range(n_max) for j in range(n + 1)}
    return SimplicialModule(ring, labels, faces, degs, n_max)


# ---------------------------------------------------------------------------
# EM and AW

def _degenerate(M: SimplicialModule, level: int, vec, seq):
    for j in seq:
        vec = M.degeneracy(level, j).apply(vec)
        level += 1
    return vec


def _front(M, n, p, vec):
    for i in range(n, p, -1):
        vec = M.face(i, i).apply(vec)
    return vec


def _back(M, n, q, vec):
    for i in range(n, q, -1):
        vec = M.face(i, 0).apply(vec)
    return vec


def eilenberg_maclane(M: SimplicialModule, N: SimplicialModule) -> ChainMap:
    """Shuffle map ``C(M) (x) C(N) -> C(M (x) N)`` on degrees >= -n_max."""
    n_max = min(M.n_max, N.n_max)
    MN = tensor_simplicial(M, N)
    _, cm, _, secm = M._normalization
    _, cn, _, secn = N._normalization
    _, cmn, projmn, _ = MN._normalization
    src = truncate_above(tensor(cm, cn), -n_max)
    ring = M.ring
    nb = N.rank

    def img(lab):
        x, y = lab
        p, q = -cm.degree_of(x), -cn.degree_of(y)
        xv = secm[p].apply({cm.index(-p, x): 1})
        yv = secn[q].apply({cn.index(-q, y): 1})
        out = {}
        for mu, nu, sgn in shuffles(p, q):
            a = _degenerate(M, p, xv, nu)
            b = _degenerate(N, q, yv, mu)
            for i, u in a.items():
                for j, w in b.items():
                    k = i * nb(p + q) + j
                    out[k] = ring.norm(out.get(k, 0) + sgn * u * w)
        pv = projmn.block(-(p + q)).apply(out)
        return cmn.from_coords(-(p + q), pv)

    return ChainMap.from_function(src, cmn, img)


def alexander_whitney(M: SimplicialModule, N: SimplicialModule) -> ChainMap:
    """Front-face/back-face map ``C(M (x) N) -> C(M) (x) C(N)``."""
    n_max = min(M.n_max, N.n_max)
    MN = tensor_simplicial(M, N)
    _, cm, pm, _ = M._normalization
    _, cn, pn, _ = N._normalization
    _, cmn, _, secmn = MN._normalization
    tgt = truncate_above(tensor(cm, cn), -n_max)
    ring = M.ring

    def img(lab):
        n = -cmn.degree_of(lab)
        v = secmn[n].apply({cmn.index(-n, lab): 1})
        out = {}
        for k, c in v.items():
            a, b = divmod(k, N.rank(n))
            for p in range(n + 1):
                q = n - p
                fa = pm.block(-p).apply(_front(M, n, p, {a: 1}))
                bb = pn.block(-q).apply(_back(N, n, q, {b: 1}))
                for i, u in fa.items():
                    for j, w in bb.items():
                        key = (cm.labels(-p)[i], cn.labels(-q)[j])
                        out[key] = ring.norm(out.get(key, 0) + c * u * w)
        return {kk: vv for kk, vv in out.items() if vv}

    return ChainMap.from_function(cmn, tgt, img)


# ---------------------------------------------------------------------------
# finite simplicial sets

class FiniteSimplicialSet:
    """Nondegenerate simplices with their faces.

    A simplex at level m is ``(x, s)`` with ``x`` nondegenerate of dimension k
    and ``s: [m] ->> [k]`` a monotone surjection.  ``faces[x, i]`` is either a
    nondegenerate name or such a pair.
    """

    def __init__(self, nondegenerate: Mapping[int, Sequence[Hashable]],
                 faces: Mapping[tuple, object], n_max: int | None = None):
        self.nondeg = {k: tuple(v) for k, v in nondegenerate.items() if v}
        self.dim_of = {}
        for k, xs in self.nondeg.items():
            for x in xs:
                if x in self.dim_of:
                    raise ValueError(f"duplicate simplex {x!r}")
                self.dim_of[x] = k
        top = max(self.nondeg) if self.nondeg else 0
        self.n_max = top if n_max is None else n_max
        self._faces = {}
        for x, k in self.dim_of.items():
            if k == 0:
                continue
            for i in range(k + 1):
                f = faces.get((x, i))
                if f is None:
                    raise ValueError(f"missing face d_{i} of {x!r}")
                self._faces[(x, i)] = self._norm(f, k - 1)
        for x, k in self.dim_of.items():
            for j in range(k + 1):
                for i in range(j):
                    if k >= 2:
                        a = self.act(self.act((x, tuple(range(k + 1))), delta(k, j)), delta(k - 1, i))
                        b = self.act(self.act((x, tuple(range(k + 1))), delta(k, i)), delta(k - 1, j - 1))
                        if a != b:
                            raise SimplicialIdentityError(f"face identity fails on {x!r}")

    def _norm(self, f, level):
        if isinstance(f, tuple) and len(f) == 2 and isinstance(f[1], tuple) and f[0] in self.dim_of:
            x, s = f
        else:
            x, s = f, None
        if x not in self.dim_of:
            raise ValueError(f"unknown simplex {x!r}")
        k = self.dim_of[x]
        if s is None:
            s = tuple(range(k + 1))
        if len(s) != level + 1 or sorted(set(s)) != list(range(k + 1)) or list(s) != sorted(s):
            raise ValueError(f"bad degeneracy {s} of {x!r} at level {level}")
        return (x, tuple(s))

    def face_of(self, x, i):
        return self._faces[(x, i)]

    def act(self, simplex, theta: Sequence[int]):
        """``theta^*`` on a simplex for monotone ``theta: [m'] -> [m]``."""
        x, s = simplex
        epi, mono = epi_mono(compose(s, theta))
        y, t = self._restrict(x, mono)
        return (y, compose(t, epi))

    def _restrict(self, x, mono):
        k = self.dim_of[x]
        if len(mono) == k + 1:
            return (x, tuple(range(k + 1)))
        missing = [i for i in range(k + 1) if i not in set(mono)]
        i = missing[-1]
        rest = tuple(v if v < i else v - 1 for v in mono)
        y, t = self.face_of(x, i)
        epi, mono2 = epi_mono(compose(t, rest))
        z, u = self._restrict(y, mono2)
        return (z, compose(u, epi))

    def simplices(self, m: int):
        out = []
        for k in range(m, -1, -1):
            for x in self.nondeg.get(k, ()):
                for s in surjections(m, k):
                    out.append((x, s))
        return out

    def free_module(self, ring: Ring, n_max: int | None = None) -> SimplicialModule:
        return free_module(self, ring, n_max)


def free_module(S: FiniteSimplicialSet, ring: Ring, n_max: int | None = None) -> SimplicialModule:
    n_max = S.n_max if n_max is None else n_max
    labels = {m: S.simplices(m) for m in range(n_max + 1)}
    index = {m: {l: i for i, l in enumerate(ls)} for m, ls in labels.items()}

    def act(theta, m):
        lvl = len(theta) - 1
        return Matrix.from_columns(ring, len(labels[lvl]),
                                   [{index[lvl][S.act(x, theta)]: 1} for x in labels[m]])

    faces = {(m, i): act(delta(m, i), m) for m in range(1, n_max + 1) for i in range(m + 1)}
    degs = {(m, j): act(sigma(m, j), m) for m in range(n_max) for j in range(m + 1)}
    return SimplicialModule(ring, labels, faces, degs, n_max)


def chains_of_simplicial_set(S: FiniteSimplicialSet, ring: Ring) -> DgComplex:
    return normalized_chains(free_module(S, ring))


def nerve(elements: Sequence[Hashable], leq: Callable[[object, object], bool],
          n_max: int | None = None) -> FiniteSimplicialSet:
    """Nerve of a finite poset; nondegenerate simplices are strict chains."""
    elements = list(elements)
    chains = {0: [(e,) for e in elements]}
    k = 0
    while chains[k]:
        nxt = []
        for c in chains[k]:
            for e in elements:
                if e != c[-1] and leq(c[-1], e):
                    nxt.append(c + (e,))
        k += 1
        chains[k] = nxt
    nondeg = {k: v for k, v in chains.items() if v}
    faces = {}
    for k, cs in nondeg.items():
        if k == 0:
            continue
        for c in cs:
            for i in range(k + 1):
                faces[(c, i)] = c[:i] + c[i + 1:]
    top = max(nondeg)
    return FiniteSimplicialSet(nondeg, faces, top if n_max is None else n_max)


def vertices_to_simplex(chain: Sequence[Hashable]):
    """Weakly increasing vertex tuple in a nerve -> ``(strict chain, surjection)``."""
    strict, s = [], []
    for v in chain:
        if not strict or strict[-1] != v:
            strict.append(v)
        s.append(len(strict) - 1)
    return (tuple(strict), tuple(s))


def simplex_to_vertices(simplex) -> tuple:
    x, s = simplex
    return tuple(x[k] for k in s)


def standard_simplex(n: int, n_max: int | None = None) -> FiniteSimplicialSet:
    return nerve(range(n + 1), lambda a, b: a <= b, n_max)


def boundary_of_simplex(n: int, n_max: int | None = None) -> FiniteSimplicialSet:
    full = standard_simplex(n)
    nondeg = {k: v for k, v in full.nondeg.items() if k < n}
    faces = {key: val for key, val in full._faces.items() if full.dim_of[key[0]] < n}
    return FiniteSimplicialSet(nondeg, faces, n - 1 if n_max is None else n_max)


def point(n_max: int = 0) -> FiniteSimplicialSet:
    return FiniteSimplicialSet({0: ["*"]}, {}, n_max)


def sphere0(n_max: int = 0) -> FiniteSimplicialSet:
    return FiniteSimplicialSet({0: ["+", "-"]}, {}, n_max)


# ---------------------------------------------------------------------------
# polynomial forms

class PolyForms:
    """Polynomial forms on the n-simplex with total degree <= D.

    Coordinates ``x_1..x_n`` (``x_0 = 1 - sum x_i`` is eliminated).  A basis
    element is ``(alpha, S)``: the monomial ``x^alpha dx_S`` with ``S`` an
    increasing tuple.  Both ``x_i`` and ``dx_i`` have weight 1 for the
    truncation, which ``d`` preserves.
    """

    def __init__(self, n: int, D: int, ring: Ring):
        if ring.characteristic != 0 or not ring.is_field:
            raise CharNotZero(f"polynomial forms need a field of characteristic 0, got {ring}")
        self.n, self.D, self.ring = n, D, ring
        basis: dict[int, list] = {}
        for total in range(D + 1):
            for s_size in range(min(n, total) + 1):
                for S in itertools.combinations(range(1, n + 1), s_size):
                    for alpha in _multi_indices(n, total - s_size):
                        basis.setdefault(s_size, []).append((alpha, S))
        self.basis = {k: sorted(v, key=lambda b: (sum(b[0]) + len(b[1]), b)) for k, v in basis.items()}
        diff = {}
        cx = DgComplex(ring, self.basis, check=False)
        for k in self.basis:
            if k + 1 in self.basis:
                diff[k] = Matrix.from_columns(
                    ring, cx.dim(k + 1), [cx.to_coords(k + 1, self.d(self._one(b))) for b in cx.labels(k)])
        self.complex = DgComplex(ring, self.basis, diff)

    def _one(self, b):
        return {b: self.ring.one}

    @staticmethod
    def weight(b) -> int:
        return sum(b[0]) + len(b[1])

    def form_degree(self, b) -> int:
        return len(b[1])

    def d(self, form: Mapping) -> dict:
        out: dict = {}
        for (alpha, S), c in form.items():
            for i in range(self.n):
                a = alpha[i]
                if not a or (i + 1) in S:
                    continue
                beta = alpha[:i] + (a - 1,) + alpha[i + 1:]
                sgn, T = _wedge((i + 1,), S)
                key = (beta, T)
                out[key] = out.get(key, 0) + sgn * a * c
        return {k: v for k, v in out.items() if v}

    def multiply(self, f: Mapping, g: Mapping, truncate: bool = True) -> dict:
        """Wedge product; with ``truncate`` the terms above weight D are dropped."""
        out: dict = {}
        for (a, S), u in f.items():
            for (b, T), w in g.items():
                if set(S) & set(T):
                    continue
                key_a = tuple(x + y for x, y in zip(a, b))
                sgn, U = _wedge(S, T)
                key = (key_a, U)
                out[key] = out.get(key, 0) + sgn * u * w
        out = {k: v for k, v in out.items() if v}
        if truncate:
            out = {k: v for k, v in out.items() if self.weight(k) <= self.D}
        return out

    def _substitute(self, target: "PolyForms", xs: Sequence[dict], dxs: Sequence[dict]) -> ChainMap:
        """Algebra map determined by images of ``x_i`` and ``dx_i`` (1-based lists)."""
        ring = self.ring
        one = {((0,) * target.n, ()): ring.one}

        def img(b):
            alpha, S = b
            acc = one
            for i, a in enumerate(alpha):
                for _ in range(a):
                    acc = target.multiply(acc, xs[i], truncate=False)
            for i in S:
                acc = target.multiply(acc, dxs[i - 1], truncate=False)
            return {k: v for k, v in acc.items() if v}

        return ChainMap.from_function(self.complex, target.complex, img)

    def _var(self, i):
        e = [0] * self.n
        e[i - 1] = 1
        return {(tuple(e), ()): self.ring.one}

    def _dvar(self, i):
        return {((0,) * self.n, (i,)): self.ring.one}

    def face(self, i: int, target: "PolyForms | None" = None) -> ChainMap:
        """Restriction to the i-th face ``t_i = 0``: Omega_n -> Omega_{n-1}."""
        n = self.n
        tgt = target or PolyForms(n - 1, self.D, self.ring)
        xs, dxs = [], []
        for j in range(1, n + 1):
            if i == 0:
                if j == 1:
                    x = {((0,) * (n - 1), ()): self.ring.one}
                    for k in range(1, n):
                        x[tgt._key_var(k)] = -self.ring.one
                    dx = {tgt._key_dvar(k): -self.ring.one for k in range(1, n)}
                else:
                    x, dx = tgt._var(j - 1), tgt._dvar(j - 1)
            elif j < i:
                x, dx = tgt._var(j), tgt._dvar(j)
            elif j == i:
                x, dx = {}, {}
            else:
                x, dx = tgt._var(j - 1), tgt._dvar(j - 1)
            xs.append(x)
            dxs.append(dx)
        return self._substitute(tgt, xs, dxs)

    def degeneracy(self, j: int, target: "PolyForms | None" = None) -> ChainMap:
        """Pullback along the codegeneracy: Omega_n -> Omega_{n+1}."""
        n = self.n
        tgt = target or PolyForms(n + 1, self.D, self.ring)
        xs, dxs = [], []
        for k in range(1, n + 1):
            if j >= 1 and k == j:
                x = _add(tgt._var(k), tgt._var(k + 1))
                dx = _add(tgt._dvar(k), tgt._dvar(k + 1))
            elif k < j:
                x, dx = tgt._var(k), tgt._dvar(k)
            else:
                x, dx = tgt._var(k + 1), tgt._dvar(k + 1)
            xs.append(x)
            dxs.append(dx)
        return self._substitute(tgt, xs, dxs)

    def _key_var(self, i):
        return next(iter(self._var(i)))

    def _key_dvar(self, i):
        return next(iter(self._dvar(i)))


def _add(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


def _multi_indices(n, total):
    if n == 0:
        if total == 0:
            yield ()
        return
    for a in range(total, -1, -1):
        for rest in _multi_indices(n - 1, total - a):
            yield (a,) + rest


def _wedge(S, T):
    """Sign and sorted union of ``dx_S ^ dx_T`` (disjoint)."""
    seq = list(S) + list(T)
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return (-1 if inv % 2 else 1), tuple(sorted(seq))


def omega_forms(n: int, D: int, ring: Ring) -> PolyForms:
    return PolyForms(n, D, ring)


# ---------------------------------------------------------------------------
# identity audits

def _report():
    from opforge.operads.base import AxiomReport
    return AxiomReport()


def _clean(ring, vec: Mapping) -> dict:
    return {k: ring.norm(v) for k, v in vec.items() if ring.norm(v)}


def check_aw_em(M: SimplicialModule, N: SimplicialModule):
    """``AW o EM = id`` on ``C(M) (x) C(N)`` (degrees >= -n_max), matrix by matrix."""
    rep = _report()
    em, aw = eilenberg_maclane(M, N), alexander_whitney(M, N)
    src = em.source
    comp = aw @ em
    for n in src.degrees():
        rep.record("AW∘EM = id")
        if comp.block(n) != Matrix.identity(M.ring, src.dim(n)):
            rep.fail("AW∘EM = id", degree=n)
            break
    return rep


def check_em_symmetry(M: SimplicialModule, N: SimplicialModule):
    """``C(swap) o EM_{M,N} = EM_{N,M} o tau`` with tau the Koszul symmetry."""
    rep = _report()
    ring = M.ring
    em, em2 = eilenberg_maclane(M, N), eilenberg_maclane(N, M)
    sw = chains_of_map(swap_simplicial(M, N))
    src = em.source
    cm, cn = M.normalized(), N.normalized()
    for lab in src.all_labels():
        x, y = lab
        sgn = -1 if (cm.degree_of(x) * cn.degree_of(y)) % 2 else 1
        lhs = _clean(ring, sw.apply(em.image(lab)))
        rhs = _clean(ring, {k: sgn * v for k, v in em2.image((y, x)).items()})
        rep.record("EM symmetry")
        if lhs != rhs:
            rep.fail("EM symmetry", label=lab)
            break
    return rep


def check_aw_coassociativity(M: SimplicialModule, N: SimplicialModule, P: SimplicialModule):
    """``(AW (x) 1) o AW = (1 (x) AW) o AW`` after reassociating ``(M N) P = M (N P)``."""
    rep = _report()
    ring = M.ring
    MN, NP = tensor_simplicial(M, N), tensor_simplicial(N, P)
    aw_l, aw_mn = alexander_whitney(MN, P), alexander_whitney(M, N)
    aw_r, aw_np = alexander_whitney(M, NP), alexander_whitney(N, P)
    left_src, right_src = aw_l.source, aw_r.source
    for lab in left_src.all_labels():
        (a, b), c = lab
        rlab = (a, (b, c))
        rep.record("AW coassociativity")
        if not right_src.has_label(rlab):
            rep.fail("AW coassociativity", label=lab, reason="bases differ")
            break
        lhs: dict = {}
        for (u, p), v in aw_l.image(lab).items():
            for (x, y), w in aw_mn.image(u).items():
                lhs[(x, y, p)] = lhs.get((x, y, p), 0) + v * w
        rhs: dict = {}
        for (x, u), v in aw_r.image(rlab).items():
            for (y, p), w in aw_np.image(u).items():
                rhs[(x, y, p)] = rhs.get((x, y, p), 0) + v * w
        if _clean(ring, lhs) != _clean(ring, rhs):
            rep.fail("AW coassociativity", label=lab)
            break
    return rep


def dold_kan_unit(X: DgComplex, n_max: int | None = None) -> ChainMap:
    """``X -> C(Gamma X)``, ``x |-> [(id, x)]``; an isomorphism of complexes."""
    G = dold_kan_inverse(X, n_max)
    moore, cx, proj, _ = G._normalization
    ring = X.ring

    def img(x):
        k = -X.degree_of(x)
        ident = tuple(range(k + 1))
        coords = proj.block(-k).apply({moore.index(-k, (ident, x)): ring.one})
        return cx.from_coords(-k, coords)

    return ChainMap.from_function(X, cx, img)


def check_dold_kan_roundtrip(X: DgComplex, n_max: int | None = None):
    """``C_* o N_* = id``: the unit map is a chain isomorphism, degree by degree."""
    rep = _report()
    u = dold_kan_unit(X, n_max)
    tgt = u.target
    for n in sorted(set(X.degrees()) | set(tgt.degrees())):
        rep.record("C_*∘N_* = id")
        b = u.block(n)
        if X.dim(n) != tgt.dim(n) or (X.dim(n) and _rank(b) != X.dim(n)):
            rep.fail("C_*∘N_* = id", degree=n)
            break
    return rep


def _rank(m: Matrix) -> int:
    from opforge.exactlin import rank
    return rank(m)


def check_polyforms(P: PolyForms):
    """Simplicial dga identities on ``Omega_n`` and its neighbours, plus ``H = k`` in degree 0."""
    from opforge.complexes import homology
    rep = _report()
    ring, n, D = P.ring, P.n, P.D
    omega = {m: P if m == n else PolyForms(m, D, ring) for m in range(max(0, n - 2), n + 3)}
    labs = list(P.complex.all_labels())
    # Leibniz rule for the wedge product (both sides truncated at weight D)
    for f in labs:
        for g in labs:
            rep.record("Leibniz")
            fv, gv = {f: 1}, {g: 1}
            lhs = P.d(P.multiply(fv, gv))
            sgn = -1 if P.form_degree(f) % 2 else 1
            rhs = _add(P.multiply(P.d(fv), gv), {k: sgn * v for k, v in P.multiply(fv, P.d(gv)).items()})
            if _clean(ring, lhs) != _clean(ring, rhs):
                rep.fail("Leibniz", forms=(f, g))
                return rep
    faces = {(m, i): omega[m].face(i, omega[m - 1]) for m in omega if m - 1 in omega and m >= 1
             for i in range(m + 1)}
    degs = {(m, j): omega[m].degeneracy(j, omega[m + 1]) for m in omega if m + 1 in omega
            for j in range(m + 1)}
    # structure maps are multiplicative
    structure = [(f, omega[m - 1]) for (m, i), f in faces.items() if m == n]
    structure += [(f, omega[m + 1]) for (m, i), f in degs.items() if m == n]
    for f, tgt in structure:
        for a in labs:
            for b in labs:
                if P.weight(a) + P.weight(b) > D:
                    continue
                rep.record("multiplicative structure maps")
                prod = P.multiply({a: 1}, {b: 1})
                lhs = f.apply(prod)
                rhs = tgt.multiply(f.image(a), f.image(b))
                if _clean(ring, lhs) != _clean(ring, rhs):
                    rep.fail("multiplicative structure maps", forms=(a, b))
                    return rep

    def eq(u: GradedMap, v: GradedMap) -> bool:
        return all(u.block(k) == v.block(k) for k in set(u.source.degrees()))

    ident = {m: ChainMap.identity(omega[m].complex) for m in omega}
    m = n
    for j in range(m + 1):
        for i in range(j):
            if (m, j) in faces and (m - 1, i) in faces:
                rep.record("simplicial identities")
                if not eq(faces[m - 1, i] @ faces[m, j], faces[m - 1, j - 1] @ faces[m, i]):
                    rep.fail("simplicial identities", relation=f"d{i}d{j}")
                    return rep
    for j in range(m + 1):
        s = degs[m, j]
        for i in range(m + 2):
            rep.record("simplicial identities")
            lhs = faces[m + 1, i] @ s
            if i < j:
                rhs = degs[m - 1, j - 1] @ faces[m, i]
            elif i in (j, j + 1):
                rhs = ident[m]
            else:
                rhs = degs[m - 1, j] @ faces[m, i - 1]
            if not eq(lhs, rhs):
                rep.fail("simplicial identities", relation=f"d{i}s{j}")
                return rep
        for i in range(j + 1):
            rep.record("simplicial identities")
            if not eq(degs[m + 1, i] @ degs[m, j], degs[m + 1, j + 1] @ degs[m, i]):
                rep.fail("simplicial identities", relation=f"s{i}s{j}")
                return rep
    h = homology(P.complex)
    rep.record("H(Ω) = k")
    if h.ranks() != {0: 1} or any(t for _, t in h.groups.values()):
        rep.fail("H(Ω) = k", homology=str(h))
    return rep
