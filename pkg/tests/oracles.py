"""Independent oracles shared by the test modules."""

from __future__ import annotations

from opforge.algebras import coproduct_with_free, free_algebra, ideal_closure
from opforge.complexes import DgComplex
from opforge.exactlin import Matrix, rank


def multilinear_part_ranks(O, A, c, d, N):
    """Ranks per degree of the part of ``A ⊔ F(x_0, .., x_{n-1})`` at color d
    containing each letter x_i (of color c[i], degree 0) exactly once.

    This is the coequalizer description of ``O_A(c, d)`` computed from scratch:
    free algebra on U + X, relations of A, span closure, then a rank count on
    the multilinear labels.
    """
    ring = O.ring
    letters = {}
    for i, ci in enumerate(c):
        letters.setdefault(ci, []).append(f"x{i}")
    M = {col: DgComplex(ring, {0: labs}) for col, labs in letters.items()}
    n = len(c)
    B = coproduct_with_free(A, M, A.N + n if N is None else N + n)
    F = B.free
    want = sorted(("m", f"x{i}") for i in range(n))
    cx = F.complex(d)

    def multilinear(lab):
        return lab[0] != "q" and sorted(g for g in lab[2] if g[0] == "m") == want \
            and len(lab[2]) - n <= N

    out = {}
    for k in cx.degrees():
        labs = [l for l in cx.labels(k) if multilinear(l)]
        if not labs:
            continue
        pos = {l: i for i, l in enumerate(labs)}
        cols = []
        for v in B.ideal.vectors(d):
            col = {pos[l]: u for l, u in v.items() if l in pos}
            if col:
                cols.append(col)
        r = rank(Matrix.from_columns(ring, len(labs), cols)) if cols else 0
        if len(labs) - r:
            out[k] = len(labs) - r
    return out
