"""Command line front end: JSON workspaces, verbs and reports.

A workspace file is UTF-8 JSON with ``"schema": "opforge/1"`` and objects
grouped by kind (``complex``, ``operad``, ``algebra`` ...).  Matrices are
``[[row, col, "num/den"], ...]`` triplets and degrees are string keys.  Every
verb prints a report naming the invariant it checked; the exit status is 0
for pass, 1 for a mathematical failure (with a witness) and 2 for a usage or
validation error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from opforge.exactlin import Matrix, QQ, Ring, parse_ring
from opforge.complexes import (
    ChainMap, DSquaredNonzero, DgComplex, NotAChainMap, cone_of_identity, direct_sum, homology,
    is_quasi_iso, random_complex,
)

from opforge.exactlin import TorsionQuotient
from opforge.operads.base import OperadError
from opforge.simplicial import OutOfWindow
from opforge.splittings import BadHomotopy

SCHEMA = "opforge/1"
REPORT_SCHEMA = "opforge-report/1"
KINDS = ("ring", "complex", "map", "operad", "algebra", "splitting", "simplicial_module",
         "simplicial_set", "module", "category")
BUILTIN_OPERADS = ("Com", "uCom", "Ass", "uAss", "MCom", "MuCom", "MAss", "MuAss")


class ParseError(ValueError):
    """Malformed input: bad JSON, wrong schema, missing fields."""


class ValidationError(ValueError):
    """Well-formed input violating a structural invariant."""

    def __init__(self, where: str, invariant: str, message: str):
        super().__init__(f"{where}: {invariant}: {message}")
        self.where, self.invariant = where, invariant


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# JSON helpers

def _tuplify(v):
    if isinstance(v, list):
        return tuple(_tuplify(x) for x in v)
    return v


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k) if not isinstance(k, str) else k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return repr(v)


def _color(key):
    """Colors are JSON strings; a key starting with ``[`` is a JSON list (tuple color)."""
    if isinstance(key, str) and key.startswith("["):
        return _tuplify(json.loads(key))
    return _tuplify(key)


def matrix_from_triplets(ring: Ring, rows: int, cols: int, triplets) -> Matrix:
    entries = {}
    for t in triplets or ():
        if len(t) != 3:
            raise ParseError(f"matrix entry {t!r} is not [row, col, value]")
        r, c, v = int(t[0]), int(t[1]), ring(Fraction(str(t[2])))
        if not (0 <= r < rows and 0 <= c < cols):
            raise ParseError(f"entry ({r}, {c}) outside a {rows}x{cols} matrix")
        if v:
            entries[(r, c)] = v
    return Matrix(ring, rows, cols, entries)


def matrix_to_triplets(m: Matrix) -> list:
    out = []
    for c, col in enumerate(m.columns()):
        for r, v in sorted(col.items()):
            out.append([r, c, str(v)])
    return sorted(out)


def complex_to_json(x: DgComplex) -> dict:
    basis = {str(n): [_jsonable(l) for l in x.labels(n)] for n in x.degrees()}
    d = {str(n): matrix_to_triplets(x.d(n)) for n in x.degrees() if not x.d(n).is_zero()}
    return {"basis": basis, "d": d}


def dump_workspace(data: Mapping) -> str:
    """JSON text with innermost arrays on one line (diff-friendly triplets)."""
    text = json.dumps(data, indent=1, ensure_ascii=False)
    return re.sub(r"\[[^\[\]{}]*\]", lambda m: json.dumps(json.loads(m.group(0)), ensure_ascii=False),
                  text) + "\n"


# ---------------------------------------------------------------------------
# workspace

@dataclass
class Workspace:
    ring: Ring = QQ
    objects: dict = field(default_factory=lambda: {k: {} for k in KINDS})
    sources: dict = field(default_factory=dict)      # name -> "file:line"
    _built: dict = field(default_factory=dict)

    def names(self, kind: str) -> list:
        return sorted(self.objects[kind])

    def has(self, kind: str, name: str) -> bool:
        return name in self.objects[kind]

    def where(self, name: str) -> str:
        return self.sources.get(name, "<workspace>")


def _line_of(text: str, name: str) -> int:
    needle = json.dumps(name)
    for i, line in enumerate(text.splitlines(), 1):
        if needle + ":" in line.replace(" ", "") or needle + " :" in line:
            return i
    return 1


def parse_workspace(files: Sequence[str | Path], ring: Ring | None = None) -> Workspace:
    """Load and validate workspace files; every object is built and checked here."""
    ws = Workspace()
    rings = []
    for path in files:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError(f"{path}: cannot read: {e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from e
        if not isinstance(data, dict) or data.get("schema") != SCHEMA:
            raise ParseError(f"{path}:1: expected a top-level \"schema\": \"{SCHEMA}\"")
        for key in data:
            if key != "schema" and key not in KINDS:
                raise ParseError(f"{path}:{_line_of(text, key)}: unknown kind {key!r}")
        if "ring" in data:
            try:
                rings.append(parse_ring(str(data["ring"])))
            except ValueError as e:
                raise ParseError(f"{path}:{_line_of(text, 'ring')}: {e}") from e
        for kind in KINDS:
            if kind == "ring" or kind not in data:
                continue
            if not isinstance(data[kind], dict):
                raise ParseError(f"{path}:{_line_of(text, kind)}: {kind} must map names to objects")
            for name, spec in data[kind].items():
                for other in KINDS:
                    if name in ws.objects[other]:
                        raise ValidationError(f"{path}:{_line_of(text, name)}", "unique names",
                                              f"{name!r} is defined twice")
                ws.objects[kind][name] = spec
                ws.sources[name] = f"{path}:{_line_of(text, name)}"
    if ring is not None:
        ws.ring = ring
    elif rings:
        ws.ring = rings[0]
    for r in rings:
        if r != ws.ring:
            raise ValidationError(ws.where("ring"), "single coefficient ring",
                                  f"files use {r} and {ws.ring}")
    # build (and thereby validate) everything in dependency order
    for kind in ("complex", "map", "simplicial_set", "simplicial_module", "category", "operad",
                 "algebra", "splitting", "module"):
        for name in ws.names(kind):
            build(ws, kind, name)
    return ws


def build(ws: Workspace, kind: str, name: str):
    key = (kind, name)
    if key in ws._built:
        return ws._built[key]
    if name not in ws.objects[kind]:
        raise ValidationError(ws.where(name), "references resolve", f"no {kind} named {name!r}")
    spec = ws.objects[kind][name]
    where = ws.where(name)
    try:
        obj = _BUILDERS[kind](ws, name, spec)
    except (ParseError, ValidationError, UsageError):
        raise
    except DSquaredNonzero as e:
        raise ValidationError(where, "d∘d = 0", f"{kind} {name!r}: d∘d ≠ 0 in degree {e.degree}") from e
    except NotAChainMap as e:
        raise ValidationError(where, "chain map", f"{name!r} fails to commute with d in degree {e.degree}") from e
    except (KeyError, TypeError, IndexError) as e:
        raise ParseError(f"{where}: malformed {kind} {name!r}: {e!r}") from e
    except ValueError as e:
        raise ValidationError(where, kind, f"{name!r}: {e}") from e
    ws._built[key] = obj
    return obj


def _complex_from(ws: Workspace, spec, ctx: str) -> DgComplex:
    if isinstance(spec, str):
        return build(ws, "complex", spec)
    if "cone" in spec:
        return cone_of_identity(ws.ring, int(spec["cone"]))
    basis = {int(n): [_tuplify(l) for l in labs] for n, labs in spec.get("basis", {}).items()}
    dims = {n: len(b) for n, b in basis.items()}
    diff = {}
    for n, trip in spec.get("d", {}).items():
        n = int(n)
        diff[n] = matrix_from_triplets(ws.ring, dims.get(n + 1, 0), dims.get(n, 0), trip)
    return DgComplex(ws.ring, basis, diff)


def _build_complex(ws, name, spec):
    return _complex_from(ws, spec, name)


def _build_map(ws, name, spec):
    src = _complex_from(ws, spec["source"], name)
    tgt = _complex_from(ws, spec["target"], name)
    blocks = {int(n): matrix_from_triplets(ws.ring, tgt.dim(int(n)), src.dim(int(n)), t)
              for n, t in spec.get("blocks", {}).items()}
    return ChainMap(src, tgt, blocks)


def _build_simplicial_set(ws, name, spec):
    from opforge.simplicial import FiniteSimplicialSet, boundary_of_simplex, standard_simplex
    if "standard_simplex" in spec:
        return standard_simplex(int(spec["standard_simplex"]), spec.get("n_max"))
    if "boundary_of_simplex" in spec:
        return boundary_of_simplex(int(spec["boundary_of_simplex"]), spec.get("n_max"))
    nondeg = {int(k): [_tuplify(x) for x in v] for k, v in spec["nondegenerate"].items()}
    faces = {}
    for x, i, y in spec.get("faces", []):
        faces[(_tuplify(x), int(i))] = _tuplify(y)
    return FiniteSimplicialSet(nondeg, faces, spec.get("n_max"))


def _build_simplicial_module(ws, name, spec):
    from opforge.simplicial import SimplicialModule, dold_kan_inverse, free_module
    if "dold_kan" in spec:
        return dold_kan_inverse(_complex_from(ws, spec["dold_kan"], name), spec.get("n_max"))
    if "free" in spec:
        return free_module(build(ws, "simplicial_set", spec["free"]), ws.ring, spec.get("n_max"))
    n_max = int(spec["n_max"])
    labels = {int(m): [_tuplify(l) for l in v] for m, v in spec["labels"].items()}
    rank = lambda m: len(labels.get(m, ()))  # noqa: E731
    faces, degs = {}, {}
    for key, t in spec.get("faces", {}).items():
        m, i = (int(p) for p in key.split(","))
        faces[(m, i)] = matrix_from_triplets(ws.ring, rank(m - 1), rank(m), t)
    for key, t in spec.get("degeneracies", {}).items():
        m, j = (int(p) for p in key.split(","))
        degs[(m, j)] = matrix_from_triplets(ws.ring, rank(m + 1), rank(m), t)
    M = SimplicialModule(ws.ring, labels, faces, degs, n_max)
    from opforge.simplicial import SimplicialIdentityError
    try:
        M.check_identities()
    except SimplicialIdentityError as e:
        raise ValidationError(ws.where(name), "simplicial identities", str(e)) from e
    return M


def _build_category(ws, name, spec):
    from opforge.operads import FiniteCategory
    if "builtin" in spec:
        return builtin_category(spec["builtin"])
    arrows = {a: (_tuplify(s), _tuplify(t)) for a, (s, t) in spec.get("arrows", {}).items()}
    rels = [(tuple(a), tuple(b)) for a, b in spec.get("relations", [])]
    return FiniteCategory([_tuplify(o) for o in spec["objects"]], arrows, rels)


def builtin_category(name: str):
    from opforge.operads import FiniteCategory
    cats = {
        "point": (["0"], {}, []),
        "arrow": (["0", "1"], {"f": ("0", "1")}, []),
        "span": (["0", "1", "2"], {"f": ("0", "1"), "g": ("0", "2")}, []),
        "idempotent": (["0"], {"e": ("0", "0")}, [(("e", "e"), ("e",))]),
    }
    if name not in cats:
        raise UsageError(f"unknown category {name!r}; choose from {sorted(cats)} or a workspace name")
    return FiniteCategory(*cats[name])


def _build_operad(ws, name, spec):
    from opforge.operads import (
        PlanarPosetCom, PosetCom, SymmetrizedOperad, TabulatedOperad, check_operad_axioms,
        module_operad, operad_power_by_category,
    )
    A = int(spec.get("max_arity", 4))
    if "builtin" in spec:
        return builtin_operad(spec["builtin"], ws.ring, A)
    if "module_operad" in spec:
        return module_operad(resolve_operad(ws, spec["module_operad"], A))
    if "power_by_category" in spec:
        p = spec["power_by_category"]
        return operad_power_by_category(resolve_operad(ws, p["operad"], A), resolve_category(ws, p["category"]))
    if "poset" in spec:
        p = spec["poset"]
        colors = [_tuplify(c) for c in p["colors"]]
        rel = {(c, c) for c in colors} | {(_tuplify(a), _tuplify(b)) for a, b in p.get("leq", [])}
        leq = lambda a, b: (a, b) in rel  # noqa: E731
        unital = bool(spec.get("unital", False))
        if spec.get("planar"):
            return SymmetrizedOperad(PlanarPosetCom(ws.ring, colors, leq, A, unital, name=name))
        return PosetCom(ws.ring, colors, leq, A, unital, name=name)
    if "tabulated" in spec:
        t = spec["tabulated"]
        colors = [_tuplify(c) for c in t["colors"]]
        comps = {}
        for entry in t.get("components", []):
            key = (tuple(_tuplify(c) for c in entry["inputs"]), _tuplify(entry["output"]))
            comps[key] = _complex_from(ws, entry["complex"], name)
        flat = {k: sum(cx.ranks.values()) for k, cx in comps.items()}
        acts, compos = {}, {}
        for entry in t.get("actions", []):
            c = tuple(_tuplify(x) for x in entry["inputs"])
            d, k = _tuplify(entry["output"]), int(entry["k"])
            tc = list(c)
            tc[k], tc[k + 1] = tc[k + 1], tc[k]
            acts[(c, d, k)] = matrix_from_triplets(ws.ring, flat.get((tuple(tc), d), 0),
                                                   flat.get((c, d), 0), entry["matrix"])
        for entry in t.get("compositions", []):
            c = tuple(_tuplify(x) for x in entry["inputs"])
            d, i = _tuplify(entry["output"]), int(entry["i"])
            b = tuple(_tuplify(x) for x in entry["block"])
            tgt = c[:i] + b + c[i + 1:]
            compos[(c, d, i, b)] = matrix_from_triplets(
                ws.ring, flat.get((tgt, d), 0), flat.get((c, d), 0) * flat.get((b, c[i]), 0),
                entry["matrix"])
        units = {_color(col): {_tuplify(l): ws.ring(Fraction(str(v))) for l, v in vec}
                 for col, vec in t.get("units", {}).items()}
        O = TabulatedOperad(ws.ring, colors, A, comps, acts, compos, units, name=name)
        rep = check_operad_axioms(O)
        if not rep.ok:
            raise ValidationError(ws.where(name), rep.failure, f"operad {name!r}: {_jsonable(rep.witness)}")
        return O
    raise ParseError(f"{ws.where(name)}: operad {name!r} needs builtin, poset, tabulated, "
                     "module_operad or power_by_category")


def operad_to_json(O) -> dict:
    """Serialize any tabulable operad in the ``tabulated`` format."""
    from opforge.operads import tabulate
    T = tabulate(O)
    comps, acts, compos = [], [], []
    for (c, d), cx in T._components.items():
        comps.append({"inputs": list(c), "output": d, "complex": complex_to_json(cx)})
    for (c, d, k), m in T._actions.items():
        if not m.is_zero():
            acts.append({"inputs": list(c), "output": d, "k": k, "matrix": matrix_to_triplets(m)})
    for (c, d, i, b), m in T._compositions.items():
        compos.append({"inputs": list(c), "output": d, "i": i, "block": list(b),
                       "matrix": matrix_to_triplets(m)})
    units = {str(col): [[_jsonable(l), str(v)] for l, v in vec.items()] for col, vec in T._units.items()}
    return {"max_arity": O.max_arity,
            "tabulated": {"colors": list(O.colors), "components": comps, "actions": acts,
                          "compositions": compos, "units": units}}


def builtin_operad(name: str, ring: Ring, max_arity: int = 4):
    from opforge.operads import AssOperad, ComOperad, module_operad
    base = name[1:] if name.startswith("M") else name
    table = {"Com": lambda: ComOperad(ring, max_arity), "uCom": lambda: ComOperad(ring, max_arity, True),
             "Ass": lambda: AssOperad(ring, max_arity), "uAss": lambda: AssOperad(ring, max_arity, True)}
    if base not in table:
        raise UsageError(f"unknown operad {name!r}; builtins are {', '.join(BUILTIN_OPERADS)}")
    O = table[base]()
    return module_operad(O) if name.startswith("M") else O


def resolve_operad(ws: Workspace, name: str, max_arity: int = 4):
    if ws.has("operad", name):
        return build(ws, "operad", name)
    return _cached(ws, ("builtin-operad", name, max_arity), lambda: builtin_operad(name, ws.ring, max_arity))


def resolve_category(ws: Workspace, name: str):
    if ws.has("category", name):
        return build(ws, "category", name)
    return builtin_category(name)


def _cached(ws, key, fn):
    got = ws._built.get(key)
    if got is None:
        got = ws._built[key] = fn()
    return got


def _build_algebra(ws, name, spec):
    from opforge.algebras import free_algebra, initial_algebra, presentation
    O = resolve_operad(ws, spec["operad"], int(spec.get("max_arity", 4)))
    N = int(spec.get("truncation", min(3, O.max_arity)))
    gens = {_color(col): _complex_from(ws, cx, name) for col, cx in spec.get("generators", {}).items()}
    for col in gens:
        if col not in O.colors:
            raise ValidationError(ws.where(name), "references resolve", f"unknown color {col!r}")
    if not gens:
        return initial_algebra(O, N)
    rels = []
    for r in spec.get("relations", []):
        vec = {_tuplify(l): ws.ring(Fraction(str(v))) for l, v in r["vector"]}
        rels.append((_color(r["color"]), {k: v for k, v in vec.items() if v}))
    if not rels:
        return free_algebra(O, gens, N)
    return presentation(O, gens, rels, N)


def _build_splitting(ws, name, spec):
    O = resolve_operad(ws, spec["operad"], int(spec.get("max_arity", 4)))
    return make_splitting(O, spec.get("kind", "rational"), spec["operad"])


def make_splitting(O, kind: str, operad_name: str = ""):
    from opforge.operads import ModuleOperad, SymmetrizedOperad
    from opforge.splittings import induced_splitting_on_MO, planar_splitting, rational_splitting
    if isinstance(O, ModuleOperad):
        base = make_splitting(O.base, kind)
        return induced_splitting_on_MO(base, O)
    if kind == "rational":
        if O.ring.characteristic != 0 or not O.ring.is_field:
            raise UsageError(f"the rational splitting needs Q, not {O.ring}")
        return rational_splitting(O)
    if kind == "planar":
        if not isinstance(O, SymmetrizedOperad):
            raise UsageError(f"operad {operad_name or O.name!r} is not a symmetrization; "
                             "use Ass/uAss or a planar poset operad")
        return planar_splitting(O)
    raise UsageError(f"unknown splitting kind {kind!r}")


def _build_module(ws, name, spec):
    from opforge.envelopes import regular_module, zero_module
    A = build(ws, "algebra", spec["algebra"])
    kind = spec.get("kind", "regular")
    if kind == "regular":
        return regular_module(A, spec.get("truncation"))
    if kind == "zero":
        return zero_module(A)
    raise ParseError(f"{ws.where(name)}: module kind must be regular or zero")


_BUILDERS: dict[str, Callable] = {
    "complex": _build_complex, "map": _build_map, "simplicial_set": _build_simplicial_set,
    "simplicial_module": _build_simplicial_module, "category": _build_category,
    "operad": _build_operad, "algebra": _build_algebra, "splitting": _build_splitting,
    "module": _build_module,
}


# ---------------------------------------------------------------------------
# reports

@dataclass
class Report:
    verb: str
    invariant: str
    ok: bool
    lines: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    witness: str | None = None

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def to_json(self, argv: Sequence[str], seed: int, ring: Ring) -> dict:
        return {"schema": REPORT_SCHEMA, "verb": self.verb, "argv": list(argv), "seed": seed,
                "ring": ring.name, "invariant": self.invariant,
                "verdict": "pass" if self.ok else "fail", "exit": self.exit_code,
                "witness": self.witness, "details": _jsonable(self.details)}

    def to_text(self) -> str:
        head = f"{self.verb}: {self.invariant}: {'PASS' if self.ok else 'FAIL'}"
        body = list(self.lines)
        if self.witness:
            body.append(f"witness: {self.witness}")
        return "\n".join([head] + body)


def _axiom_report(verb, invariant, rep, extra=None) -> Report:
    lines = [f"{k}: {v} checks" for k, v in rep.counts.items()]
    out = Report(verb, invariant, rep.ok, lines, {"counts": dict(rep.counts), **(extra or {})})
    if not rep.ok:
        out.witness = f"{rep.failure} fails at {_jsonable(rep.witness)}"
    return out


def _ranks_line(label, ranks: Mapping) -> str:
    return f"{label}: " + (", ".join(f"deg {n}: {r}" for n, r in sorted(ranks.items())) or "0")


# ---------------------------------------------------------------------------
# verbs

def _operad_arg(ws, args, default="Com"):
    return resolve_operad(ws, args.operad or default, args.max_arity)


def _first_color(O, args):
    if getattr(args, "color", None) is not None:
        col = _color(args.color)
        if col not in O.colors:
            raise UsageError(f"operad {O.name} has no color {col!r}")
        return col
    return O.colors[0]


def _truncation(args, O, default=3) -> int:
    N = args.truncation if args.truncation is not None else min(default, O.max_arity)
    if N > O.max_arity:
        raise UsageError(f"truncation {N} exceeds --max-arity {O.max_arity}")
    return N


def verb_check_operad(ws, args):
    from opforge.operads import check_operad_axioms
    O = _operad_arg(ws, args)
    return _axiom_report("check-operad", "operad axioms (associativity, equivariance, unit)",
                         check_operad_axioms(O), {"operad": O.name})


def verb_check_splitting(ws, args):
    from opforge.splittings import check_splitting
    if args.splitting and ws.has("splitting", args.splitting):
        s = build(ws, "splitting", args.splitting)
    else:
        O = _splitting_operad(ws, args)
        s = make_splitting(O, args.splitting or "rational", args.operad)
    return _axiom_report("check-splitting", "SPL/INV/COM", check_splitting(s), {"splitting": s.name})


def _splitting_operad(ws, args):
    """The operad a named splitting kind lives on; Ass with ``planar`` means the symmetrization."""
    from opforge.operads import PlanarCom, SymmetrizedOperad, module_operad
    name = args.operad or "Com"
    if (args.splitting or "rational") == "planar" and not ws.has("operad", name):
        mod = name.startswith("M")
        base = name[1:] if mod else name
        if base in ("Ass", "uAss"):
            P = SymmetrizedOperad(PlanarCom(ws.ring, args.max_arity, base == "uAss"))
            return module_operad(P) if mod else P
    return resolve_operad(ws, name, args.max_arity)


def verb_homology(ws, args):
    x = _need_complex(ws, args)
    h = homology(x)
    rows = {n: {"rank": r, "torsion": list(t)} for n, (r, t) in sorted(h.groups.items())}
    lines = [f"H^{n}: {v['rank']}" + (f" + torsion {v['torsion']}" if v["torsion"] else "")
             for n, v in rows.items()] or ["H = 0"]
    lines.append("acyclic" if h.is_zero() else f"nonzero in degrees {h.nonzero_degrees()}")
    return Report("homology", "homology", True, lines, {"groups": rows, "acyclic": h.is_zero()})


def _need_complex(ws, args):
    if not args.complex:
        raise UsageError("--complex NAME is required")
    if ws.has("complex", args.complex):
        return build(ws, "complex", args.complex)
    if args.complex.startswith("cone"):
        return cone_of_identity(ws.ring, 0)
    raise UsageError(f"no complex named {args.complex!r}")


def verb_quasi_iso(ws, args):
    if not args.map or not ws.has("map", args.map):
        raise UsageError("--map NAME must name a chain map in the workspace")
    f = build(ws, "map", args.map)
    res = is_quasi_iso(f)
    rep = Report("quasi-iso", "quasi-isomorphism", res.ok, [], {"map": args.map})
    if not res.ok:
        rep.witness = f"H{res.witness_degree} is not mapped isomorphically ({res.reason})"
        rep.details["degree"] = res.witness_degree
    return rep


def _generators(ws, args, O, col):
    if getattr(args, "generators", None):
        if ws.has("complex", args.generators):
            return {col: build(ws, "complex", args.generators)}
        raise UsageError(f"no complex named {args.generators!r}")
    return {col: DgComplex(ws.ring, {0: ["x"]})}


def verb_free(ws, args):
    from opforge.algebras import free_algebra
    O = _operad_arg(ws, args)
    col = _first_color(O, args)
    N = _truncation(args, O)
    F = free_algebra(O, _generators(ws, args, O, col), N)
    lines, det = [], {}
    for d in O.colors:
        ar = F.arity_ranks(d)
        lines.append(f"color {d}: arity ranks {ar}; " + _ranks_line("degrees", F.complex(d).ranks))
        det[str(d)] = {"arity_ranks": ar, "degree_ranks": F.complex(d).ranks}
    return Report("free", "free algebra ranks", True, lines, det)


def verb_probe(ws, args):
    from opforge.algebras import admissibility_probe
    O = _operad_arg(ws, args)
    col = _first_color(O, args)
    N = _truncation(args, O, default=O.max_arity)
    A = build(ws, "algebra", args.algebra) if args.algebra else None
    res = admissibility_probe(O, A, col, args.degree, N)
    rep = Report("probe-admissibility", "A → A ⊔ F(Cone(id)) is a quasi-isomorphism", res.ok,
                 [res.summary()], {"operad": O.name, "truncation": N, **_jsonable(res.details)})
    if not res.ok:
        rep.witness = res.witness
    return rep


def verb_homotopy_identity(ws, args):
    from opforge.algebras import free_algebra
    from opforge.splittings import FreeAlgebraHomotopy, contraction_data
    O = _splitting_operad(ws, args)
    s = build(ws, "splitting", args.splitting) if args.splitting and ws.has("splitting", args.splitting) \
        else make_splitting(O, args.splitting or "rational", args.operad)
    O = s.operad
    col = _first_color(O, args)
    N = _truncation(args, O, default=O.max_arity)
    base = _generators(ws, args, O, col)[col]
    V = {col: direct_sum(base, cone_of_identity(ws.ring, 0), tags=["v", "c"])}
    alpha, h = contraction_data(V, {col: [(("c", "x"), ("c", "dx"))]})
    H = FreeAlgebraHomotopy(s, free_algebra(O, V, N), alpha, h)
    rep = H.check_identity()
    out = _axiom_report("homotopy-identity", "d∘H + H∘d = id − 𝔽(α)", rep,
                        {"operad": O.name, "truncation": N})
    if rep.ok:
        desc = H.check_descent()
        out.lines += [f"{k}: {v} checks" for k, v in desc.counts.items()]
        if not desc.ok:
            out.ok = False
            out.witness = f"{desc.failure} fails at {_jsonable(desc.witness)}"
    return out


def verb_pushout(ws, args):
    from opforge.algebras import initial_algebra
    from opforge.envelopes import NotACofibration, NotSplit, pushout_filtration
    A = build(ws, "algebra", args.algebra) if args.algebra else None
    O = A.operad if A is not None else _operad_arg(ws, args)
    col = _first_color(O, args)
    N = _truncation(args, O)
    A = A if A is not None else initial_algebra(O, N)
    ring = ws.ring
    kind = args.cofibration
    if kind == "free":
        W = DgComplex(ring, {0: ["w"]})
        f = ChainMap(DgComplex(ring, {}), W, {})
    elif kind == "cone":
        C = cone_of_identity(ring, 0)
        V = DgComplex(ring, {1: ["y"]})
        f = ChainMap(V, C, {1: Matrix.from_columns(ring, 1, [{0: 1}])})
    elif kind == "identity":
        W = DgComplex(ring, {0: ["w"]})
        f = ChainMap.identity(W)
    else:
        raise UsageError(f"unknown cofibration {kind!r}")
    try:
        res = pushout_filtration(O, A, {col: f}, N)
    except (NotSplit, NotACofibration) as e:
        return Report("pushout-filtration", "colim B_k ≅ A ⊔_{F(V)} F(W)", False, [], {}, str(e))
    stage = [sum(b.total_rank() for b in st.values()) for st in res.stages]
    rep = Report("pushout-filtration", "colim B_k ≅ A ⊔_{F(V)} F(W)", res.ok,
                 [res.summary()], {"stage_ranks": stage, "cofibration": kind, "truncation": N})
    if not res.ok:
        rep.witness = res.failure
    return rep


def verb_envelope(ws, args):
    from opforge.algebras import initial_algebra
    from opforge.envelopes import EnvelopingCategory, enveloping_operad
    from opforge.operads import check_operad_axioms
    A = build(ws, "algebra", args.algebra) if args.algebra else None
    O = A.operad if A is not None else _operad_arg(ws, args)
    A = A if A is not None else initial_algebra(O, _truncation(args, O))
    N = args.truncation if args.truncation is not None else None
    E = enveloping_operad(O, A, N)
    lines, det = [], {}
    for d in O.colors:
        for c in [()] + [(x,) for x in O.colors]:
            r = E.component(c, d).ranks
            if r:
                lines.append(_ranks_line(f"O_A({list(c)}; {d})", r))
                det[f"{list(c)}->{d}"] = r
    rep = check_operad_axioms(E, min(2, E.max_arity))
    out = _axiom_report("envelope", "enveloping operad axioms", rep, {"ranks": det})
    out.lines = lines + out.lines
    if rep.ok:
        cat = EnvelopingCategory(E).check()
        out.lines += [f"{k}: {v} checks" for k, v in cat.counts.items()]
        if not cat.ok:
            out.ok, out.witness = False, f"{cat.failure} fails at {_jsonable(cat.witness)}"
    return out


def verb_check_module(ws, args):
    from opforge.envelopes import (
        check_module_axioms, check_representation, module_to_representation, regular_module,
        representation_to_module,
    )
    if args.module:
        mod = build(ws, "module", args.module)
    elif args.algebra:
        mod = regular_module(build(ws, "algebra", args.algebra))
    else:
        raise UsageError("--module NAME or --algebra NAME is required")
    rep = check_module_axioms(mod)
    out = _axiom_report("check-module", "module axioms (M𝒪-algebra)", rep)
    if rep.ok:
        R = module_to_representation(mod)
        crep = check_representation(R)
        back = representation_to_module(R, mod)
        same = back.table == mod.table
        out.lines.append(f"representation axioms: {'PASS' if crep.ok else 'FAIL'}")
        out.lines.append(f"module ↔ representation round trip: {'exact' if same else 'differs'}")
        out.details["round_trip"] = same
        if not crep.ok or not same:
            out.ok = False
            out.witness = "representation round trip differs" if crep.ok else \
                f"{crep.failure} fails at {_jsonable(crep.witness)}"
    return out


def verb_dold_kan(ws, args):
    from opforge.simplicial import check_dold_kan_roundtrip, normalized_chains
    if args.simplicial_module:
        M = build(ws, "simplicial_module", args.simplicial_module[0])
        cx = normalized_chains(M)
        return Report("dold-kan", "simplicial identities", True,
                      [f"levels {M.level_ranks()}", _ranks_line("normalized chains", cx.ranks)],
                      {"levels": M.level_ranks(), "normalized": cx.ranks})
    if args.complex:
        xs = [_need_complex(ws, args)]
    else:
        rng = random.Random(args.seed)
        xs = [random_complex(ws.ring, rng, range(-args.level, 1), 2) for _ in range(args.pairs)]
    total = None
    for X in xs:
        rep = check_dold_kan_roundtrip(X)
        if total is None:
            total = rep
        else:
            for k, v in rep.counts.items():
                total.counts[k] = total.counts.get(k, 0) + v
            if not rep.ok:
                total.fail(rep.failure, **(rep.witness or {}))
        if not rep.ok:
            break
    out = _axiom_report("dold-kan", "C_*∘N_* = id", total, {"complexes": len(xs)})
    if out.ok:
        out.lines.append(f"C_*∘N_* = id verified on {len(xs)} complexes")
    return out


def verb_em_aw(ws, args):
    from opforge.simplicial import (
        check_aw_coassociativity, check_aw_em, check_em_symmetry, dold_kan_inverse,
    )
    if args.simplicial_module:
        names = args.simplicial_module
        if len(names) != 2:
            raise UsageError("give two --simplicial-module names")
        pairs = [tuple(build(ws, "simplicial_module", n) for n in names)]
    else:
        rng = random.Random(args.seed)
        L = args.level
        pairs = []
        for _ in range(args.pairs):
            X = random_complex(ws.ring, rng, range(-L, 1), 2, prefix="x")
            Y = random_complex(ws.ring, rng, range(-L, 1), 2, prefix="y")
            pairs.append((dold_kan_inverse(X, L), dold_kan_inverse(Y, L)))
    counts: dict = {}
    for M, N in pairs:
        for rep in (check_aw_em(M, N), check_em_symmetry(M, N), check_aw_coassociativity(M, N, M)):
            for k, v in rep.counts.items():
                counts[k] = counts.get(k, 0) + v
            if not rep.ok:
                out = Report("em-aw", "AW∘EM = id", False, [], {"counts": counts})
                out.witness = f"{rep.failure} fails at {_jsonable(rep.witness)}"
                return out
    lines = [f"{k}: {v} checks" for k, v in counts.items()]
    lines.append(f"AW∘EM = id verified on {len(pairs)} pairs (levels ≤ {min(M.n_max for M, _ in pairs)})")
    return Report("em-aw", "AW∘EM = id", True, lines, {"counts": counts, "pairs": len(pairs)})


def verb_omega(ws, args):
    from opforge.simplicial import CharNotZero, check_polyforms, omega_forms
    D = args.truncation if args.truncation is not None else 3
    try:
        P = omega_forms(args.n, D, ws.ring)
    except CharNotZero as e:
        raise UsageError(str(e)) from e
    rep = check_polyforms(P)
    out = _axiom_report("omega", "H(Ω_n^{≤D}) = k", rep, {"n": args.n, "D": D, "ranks": P.complex.ranks})
    out.lines.insert(0, _ranks_line(f"Ω_{args.n}^(≤{D})", P.complex.ranks))
    return out


def verb_prop_hom(ws, args):
    from opforge.operads import prop_from_operad
    O = _operad_arg(ws, args, "uCom")
    col = _first_color(O, args)
    P = prop_from_operad(O)
    h = P.prop_hom((col,) * args.source, (col,) * args.target)
    return Report("prop-hom", "PROP hom ranks", True,
                  [_ranks_line(f"P({args.source}, {args.target})", h.ranks)],
                  {"m": args.source, "n": args.target, "ranks": h.ranks})


def check_prop_axioms(O, max_total: int = 4):
    """Unit laws and associativity of PROP composition on basis elements, one color."""
    from opforge.operads import AxiomReport, prop_from_operad
    P = prop_from_operad(O)
    ring = O.ring
    rep = AxiomReport()
    col = O.colors[0]
    T = lambda k: (col,) * k  # noqa: E731
    for a in range(1, max_total + 1):
        for b in range(1, max_total + 1 - a + 1):
            if a + b > max_total + 1:
                continue
            try:
                hom = P.prop_hom(T(a), T(b))
            except Exception:
                continue
            for lab in hom.all_labels():
                f = {lab: ring.one}
                rep.record("PROP unit")
                if (P.compose_vec(T(a), T(b), T(b), P.identity(T(b)), f) != f
                        or P.compose_vec(T(a), T(a), T(b), f, P.identity(T(a))) != f):
                    rep.fail("PROP unit", label=lab)
                    return rep
    for a, b, c in itertools.product(range(1, max_total), repeat=3):
        if a + b + c > max_total + 1:
            continue
        try:
            hf, hg = P.prop_hom(T(a), T(b)), P.prop_hom(T(b), T(c))
            hh = P.prop_hom(T(c), T(1))
        except Exception:
            continue
        for fl in hf.all_labels():
            for gl in hg.all_labels():
                for kl in hh.all_labels():
                    f, g, k = {fl: ring.one}, {gl: ring.one}, {kl: ring.one}
                    lhs = P.compose_vec(T(a), T(c), T(1), k, P.compose_vec(T(a), T(b), T(c), g, f))
                    rhs = P.compose_vec(T(a), T(b), T(1), P.compose_vec(T(b), T(c), T(1), k, g), f)
                    rep.record("PROP associativity")
                    if lhs != rhs:
                        rep.fail("PROP associativity", labels=(fl, gl, kl))
                        return rep
    return rep


def verb_prop_check(ws, args):
    O = _operad_arg(ws, args, "uCom")
    total = args.truncation if args.truncation is not None else 4
    return _axiom_report("prop-check", "PROP axioms (unit, associativity)", check_prop_axioms(O, total),
                         {"operad": O.name})


def _operad_map(ws, args):
    from opforge.operads import AssOperad, ComOperad, ass_to_com, pi_projection
    kind = args.map or "ass-to-com"
    if kind == "ass-to-com":
        unital = bool(args.operad and args.operad.startswith("u"))
        return ass_to_com(AssOperad(ws.ring, args.max_arity, unital), ComOperad(ws.ring, args.max_arity, unital))
    if kind == "pi":
        return pi_projection(_operad_arg(ws, args))
    if kind == "identity":
        from opforge.operads import OperadMap
        return OperadMap.identity(_operad_arg(ws, args))
    raise UsageError(f"unknown operad map {kind!r}; choose ass-to-com, pi or identity")


def _equivalence(verb, invariant, check, ws, args):
    f = _operad_map(ws, args)
    res = check(f, args.max_arity)
    rep = Report(verb, invariant, res.ok, [res.summary()],
                 {"checked": res.checked, "condition_b": res.condition_b})
    if not res.ok:
        rep.witness = f"component map is not a quasi-isomorphism at {_jsonable(res.witness)}"
    return rep


def verb_weq(ws, args):
    from opforge.operads import check_weak_equivalence
    return _equivalence("weq", "weak equivalence", check_weak_equivalence, ws, args)


def verb_strong_eq(ws, args):
    from opforge.operads import check_strong_equivalence
    return _equivalence("strong-eq", "strong equivalence", check_strong_equivalence, ws, args)


def verb_mo(ws, args):
    from opforge.operads import check_operad_axioms, module_operad
    from opforge.splittings import check_splitting, induced_splitting_on_MO
    O = _splitting_operad(ws, args) if args.splitting else _operad_arg(ws, args)
    MO = module_operad(O)
    rep = check_operad_axioms(MO)
    out = _axiom_report("mo", "M𝒪 operad axioms", rep, {"operad": MO.name})
    if rep.ok and args.splitting:
        s = induced_splitting_on_MO(make_splitting(O, args.splitting, args.operad), MO)
        srep = check_splitting(s)
        out.lines += [f"induced {k}: {v} checks" for k, v in srep.counts.items()]
        if not srep.ok:
            out.ok, out.witness = False, f"induced splitting: {srep.failure} fails at {_jsonable(srep.witness)}"
    return out


def verb_power(ws, args):
    from opforge.operads import check_operad_axioms, operad_power_by_category
    O = _operad_arg(ws, args)
    C = resolve_category(ws, args.category or "arrow")
    R = operad_power_by_category(O, C)
    return _axiom_report("power-by-category", "R^C operad axioms", check_operad_axioms(R),
                         {"operad": R.name, "objects": len(C.objects)})


def _default_algebra(ws, O, N):
    from opforge.algebras import free_algebra
    return free_algebra(O, {O.colors[0]: DgComplex(ws.ring, {0: ["a"]})}, N)


def verb_induce(ws, args):
    from opforge.algebras import check_algebra_axioms, induce_along
    from opforge.operads import AssOperad, ComOperad, ass_to_com
    if args.algebra:
        A = build(ws, "algebra", args.algebra)
        src = A.operad
        if not isinstance(src, AssOperad):
            raise UsageError("induce runs along Ass → Com; the algebra must be over Ass")
    else:
        src = AssOperad(ws.ring, args.max_arity, False)
        A = _default_algebra(ws, src, _truncation(args, src))
    f = ass_to_com(src, ComOperad(ws.ring, src.max_arity, src.unital))
    B = induce_along(f, A)
    rep = check_algebra_axioms(B, 3)
    out = _axiom_report("induce", "induced algebra f_!A axioms", rep)
    for d in f.target.colors:
        out.lines.insert(0, _ranks_line(f"f_!A at {d}", B.complex(d).ranks))
        out.details[str(d)] = B.complex(d).ranks
    return out


def verb_restrict(ws, args):
    from opforge.algebras import check_algebra_axioms, restrict_along
    from opforge.operads import AssOperad, PosetCom, ass_to_com
    if args.algebra:
        B = build(ws, "algebra", args.algebra)
        tgt = B.operad
        if not isinstance(tgt, PosetCom) or len(tgt.colors) != 1:
            raise UsageError("restrict runs along Ass → Com; the algebra must be over Com")
    else:
        from opforge.operads import ComOperad
        tgt = ComOperad(ws.ring, args.max_arity, False)
        B = _default_algebra(ws, tgt, _truncation(args, tgt))
    f = ass_to_com(AssOperad(ws.ring, tgt.max_arity, tgt.unital), tgt)
    R = restrict_along(f, B)
    rep = check_algebra_axioms(R, 3)
    out = _axiom_report("restrict", "restricted algebra f^*B axioms", rep)
    for d in f.source.colors:
        out.lines.insert(0, _ranks_line(f"f^*B at {d}", R.complex(d).ranks))
        out.details[str(d)] = R.complex(d).ranks
    return out


VERBS: dict[str, Callable] = {
    "check-operad": verb_check_operad, "check-splitting": verb_check_splitting,
    "homology": verb_homology, "quasi-iso": verb_quasi_iso, "free": verb_free,
    "probe-admissibility": verb_probe, "homotopy-identity": verb_homotopy_identity,
    "pushout-filtration": verb_pushout, "envelope": verb_envelope, "check-module": verb_check_module,
    "dold-kan": verb_dold_kan, "em-aw": verb_em_aw, "omega": verb_omega, "prop-hom": verb_prop_hom,
    "prop-check": verb_prop_check, "weq": verb_weq, "strong-eq": verb_strong_eq, "mo": verb_mo,
    "power-by-category": verb_power, "induce": verb_induce, "restrict": verb_restrict,
}


# ---------------------------------------------------------------------------
# argument parsing and entry point

def _ring_arg(text: str) -> Ring:
    try:
        return parse_ring(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-w", "--workspace", action="append", default=[], metavar="FILE",
                        help="workspace file (repeatable)")
    common.add_argument("--ring", type=_ring_arg, default=None, help="Q, Z or Fp:<p> (also F2, F5 ...)")
    common.add_argument("--max-arity", type=int, default=4, help="arity bound A_max of builtin operads")
    common.add_argument("--truncation", type=int, default=None, help="arity truncation N (or weight D)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", default=None, metavar="PATH", help="write the report here")
    common.add_argument("--operad")
    common.add_argument("--algebra")
    common.add_argument("--module")
    common.add_argument("--complex")
    common.add_argument("--map")
    common.add_argument("--splitting")
    common.add_argument("--generators")
    common.add_argument("--color")
    common.add_argument("--category")
    common.add_argument("--simplicial-module", action="append", default=None)
    common.add_argument("--degree", type=int, default=0)
    common.add_argument("--level", type=int, default=3)
    common.add_argument("--pairs", type=int, default=4)
    common.add_argument("--n", type=int, default=1)
    common.add_argument("--source", type=int, default=2)
    common.add_argument("--target", type=int, default=2)
    common.add_argument("--cofibration", default="free", choices=("free", "cone", "identity"))

    parser = argparse.ArgumentParser(prog="opforge", description="Exact computations with colored dg operads.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, fn in VERBS.items():
        sub.add_parser(verb, parents=[common], help=(fn.__doc__ or "").strip() or None)
    return parser


def _threads() -> int:
    raw = os.environ.get("OPFORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"OPFORGE_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"OPFORGE_THREADS must be a positive integer, got {raw!r}")
    return n


def _replay_argv(argv: Sequence[str]) -> list:
    """argv without output-only options, as recorded in reports."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in ("--out", "--format"):
            skip = True
            continue
        if a.startswith("--out=") or a.startswith("--format="):
            continue
        out.append(a)
    return out


def run(argv: Sequence[str]) -> tuple[int, str]:
    """Run one command; returns ``(exit status, rendered output)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return (int(e.code) if e.code is not None else 2), ""
    try:
        _threads()
        ws = parse_workspace(args.workspace, args.ring)
        rep = VERBS[args.verb](ws, args)
    except (ParseError, ValidationError, UsageError) as e:
        return 2, f"error: {e}"
    except (OperadError, TorsionQuotient, OutOfWindow, BadHomotopy) as e:
        # out-of-range requests (arity bounds, torsion, truncation windows)
        return 2, f"error: {type(e).__name__}: {e}"
    if args.format == "json":
        text = json.dumps(rep.to_json(_replay_argv(argv), args.seed, ws.ring), ensure_ascii=False,
                          indent=2, sort_keys=True)
    else:
        text = rep.to_text()
    return rep.exit_code, text


def replay(report: Mapping) -> tuple[int, str]:
    """Re-run the check a JSON report records, producing a JSON report again."""
    if report.get("schema") != REPORT_SCHEMA:
        raise ParseError("not an opforge report")
    return run(list(report["argv"]) + ["--format", "json"])


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    code, text = run(argv)
    out_path = None
    if "--out" in argv:
        i = argv.index("--out")
        out_path = argv[i + 1] if i + 1 < len(argv) else None
    out_path = out_path or next((a.split("=", 1)[1] for a in argv if a.startswith("--out=")), None)
    if out_path and code != 2:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    elif text:
        stream = sys.stderr if code == 2 else sys.stdout
        print(text, file=stream)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
