"""JSON problem files.

A problem file is one JSON document::

    {
      "n": 2,
      "mode": "auto",
      "independent": true,
      "symbols": [{"name": "e", "approx": "2.71828..."}, {"name": "r2", "sqrt": "2"}],
      "generators": [{"A": [[1, 0], [0, 1]], "a": [{"re": "1", "im": "1"}, 0]}, ...],
      "witnesses": [{"A": ..., "a": ...} or null, ...],
      "branches": [[0, 0], ...],
      "normal_form": {"P": [[...]], "eta": [2, 1]}
    }

Entries are strings in the scalar grammar (real), integers, JSON floats,
``{"re": ..., "im": ...}`` pairs, or ``{"exp": entry}`` for the complex
exponential of an entry (exact when recognizable, float otherwise).  Any
float part makes the whole map a float map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .affine import AffineMap
from .explog import exact_exp
from .normal_form import NormalForm, normal_form_from
from .scalars import CNumber, ScalarSyntaxError, SymbolRegistry, SymScalar

MODES = ("auto", "exact", "numeric")


class ProblemFormatError(ValueError):
    """Malformed problem file; ``line``/``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, path: str = ""):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.column = column
        self.path = path


@dataclass
class SymbolDecl:
    name: str
    approx: str | None = None  # transcendental
    sqrt: str | None = None  # radical alias

    def to_json(self) -> dict:
        return {"name": self.name, "approx": self.approx} if self.sqrt is None else {"name": self.name, "sqrt": self.sqrt}


Entry = Any  # CNumber (exact) or complex (float)


@dataclass
class MapData:
    A: list[list[Entry]]
    a: list[Entry]

    def to_map(self) -> AffineMap:
        return AffineMap.from_data(self.A, self.a)


@dataclass
class ProblemFile:
    n: int
    generators: list[MapData]
    symbols: list[SymbolDecl] = field(default_factory=list)
    independent: bool = True
    witnesses: list[MapData | None] | None = None
    branches: list[list[int]] | None = None
    normal_form: dict | None = None  # {"P": rows, "eta": list}
    mode: str = "auto"
    registry: SymbolRegistry = field(default_factory=SymbolRegistry, compare=False, repr=False)

    def maps(self) -> list[AffineMap]:
        return [g.to_map() for g in self.generators]

    def witness_maps(self) -> list[AffineMap | None] | None:
        if self.witnesses is None:
            return None
        return [w.to_map() if w is not None else None for w in self.witnesses]

    def supplied_normal_form(self, fs=None, tol: float | None = None) -> NormalForm | None:
        if self.normal_form is None:
            return None
        import numpy as np

        from .linalg import exact_array, to_complex

        rows = self.normal_form["P"]
        flat = [x for row in rows for x in row]
        P = exact_array(rows) if all(isinstance(x, CNumber) for x in flat) else to_complex(np.array(rows, dtype=object))
        return normal_form_from(fs or self.maps(), P, self.normal_form["eta"], tol)

    # serialization ----------------------------------------------------
    def to_json_obj(self) -> dict:
        out: dict = {"n": self.n, "mode": self.mode, "independent": self.independent}
        if self.symbols:
            out["symbols"] = [s.to_json() for s in self.symbols]
        out["generators"] = [_map_json(g) for g in self.generators]
        if self.witnesses is not None:
            out["witnesses"] = [_map_json(w) if w is not None else None for w in self.witnesses]
        if self.branches is not None:
            out["branches"] = [list(b) for b in self.branches]
        if self.normal_form is not None:
            out["normal_form"] = {
                "P": [[_entry_json(x) for x in row] for row in self.normal_form["P"]],
                "eta": list(self.normal_form["eta"]),
            }
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def _scalar_json(x: SymScalar) -> str | int:
    if x.is_rational() and x.rational_value().denominator == 1:
        return int(x.rational_value())
    return str(x)


def _entry_json(x: Entry):
    if isinstance(x, CNumber):
        if x.im.is_zero():
            return _scalar_json(x.re)
        return {"re": _scalar_json(x.re), "im": _scalar_json(x.im)}
    c = complex(x)
    if c.imag == 0:
        return c.real
    return {"re": c.real, "im": c.imag}


def _map_json(m: MapData) -> dict:
    return {"A": [[_entry_json(x) for x in row] for row in m.A], "a": [_entry_json(x) for x in m.a]}


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class _Ctx:
    def __init__(self, text: str, path: str, registry: SymbolRegistry):
        self.text = text
        self.path = path
        self.reg = registry

    def locate(self, literal: str, offset: int = 0) -> tuple[int | None, int | None]:
        """Line/column of ``literal`` (as a JSON string) in the source text."""
        needle = json.dumps(literal)
        pos = self.text.find(needle)
        if pos < 0:
            return None, None
        pos += 1 + max(offset - 1, 0)
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, message: str, where: str, literal: str | None = None, offset: int = 0):
        line, col = self.locate(literal, offset) if literal is not None else (None, None)
        raise ProblemFormatError(f"{where}: {message}", line, col, self.path)


def _real(ctx: _Ctx, x, where: str):
    if isinstance(x, bool):
        ctx.fail("booleans are not scalars", where)
    if isinstance(x, int):
        return SymScalar.rational(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        try:
            return ctx.reg.parse(x)
        except ScalarSyntaxError as exc:
            ctx.fail(str(exc), where, x, exc.column)
        except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
            ctx.fail(f"{exc} in {x!r}", where, x)
    ctx.fail(f"expected a scalar, got {type(x).__name__}", where)


def _entry(ctx: _Ctx, x, where: str) -> Entry:
    if isinstance(x, dict):
        if set(x) == {"exp"}:
            z = _entry(ctx, x["exp"], where + ".exp")
            if isinstance(z, CNumber):
                e = exact_exp(z)
                if e is not None:
                    return e
            import cmath

            return cmath.exp(complex(z))
        if not set(x) <= {"re", "im"} or not x:
            ctx.fail(f"complex entries need keys re/im (got {sorted(x)})", where)
        re = _real(ctx, x.get("re", 0), where + ".re")
        im = _real(ctx, x.get("im", 0), where + ".im")
        if isinstance(re, float) or isinstance(im, float):
            return complex(float(re), float(im))
        return CNumber(re, im)
    v = _real(ctx, x, where)
    return complex(v) if isinstance(v, float) else CNumber(v)


def _map(ctx: _Ctx, obj, n: int, where: str) -> MapData:
    if not isinstance(obj, dict) or set(obj) - {"A", "a"} or "A" not in obj or "a" not in obj:
        ctx.fail("a map needs exactly the keys A and a", where)
    A, a = obj["A"], obj["a"]
    if not isinstance(A, list) or len(A) != n or any(not isinstance(r, list) or len(r) != n for r in A):
        ctx.fail(f"A must be {n}x{n}", where)
    if not isinstance(a, list) or len(a) != n:
        ctx.fail(f"a must have length {n}", where)
    return MapData(
        [[_entry(ctx, x, f"{where}.A[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(A)],
        [_entry(ctx, x, f"{where}.a[{i}]") for i, x in enumerate(a)],
    )


def parse_problem(text: str, path: str = "<string>") -> ProblemFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(exc.msg, exc.lineno, exc.colno, path) from exc
    reg = SymbolRegistry()
    ctx = _Ctx(text, path, reg)
    if not isinstance(obj, dict):
        ctx.fail("top level must be an object", "file")
    known = {"n", "mode", "independent", "symbols", "generators", "witnesses", "branches", "normal_form"}
    extra = set(obj) - known
    if extra:
        ctx.fail(f"unknown keys {sorted(extra)}", "file")
    n = obj.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        ctx.fail("n must be a positive integer", "n")
    mode = obj.get("mode", "auto")
    if mode not in MODES:
        ctx.fail(f"mode must be one of {MODES}", "mode", mode)
    independent = obj.get("independent", True)
    if not isinstance(independent, bool):
        ctx.fail("independent must be true or false", "independent")

    symbols = []
    for k, s in enumerate(obj.get("symbols", [])):
        where = f"symbols[{k}]"
        if not isinstance(s, dict) or "name" not in s or len(s.keys() & {"approx", "sqrt"}) != 1:
            ctx.fail("a symbol needs a name and exactly one of approx/sqrt", where)
        try:
            if "approx" in s:
                reg.declare_transcendental(s["name"], str(s["approx"]))
                symbols.append(SymbolDecl(s["name"], approx=str(s["approx"])))
            else:
                reg.declare_radical(s["name"], Fraction(str(s["sqrt"])))
                symbols.append(SymbolDecl(s["name"], sqrt=str(s["sqrt"])))
        except (ValueError, ZeroDivisionError) as exc:
            ctx.fail(str(exc), where, s.get("name"))

    gens = obj.get("generators")
    if not isinstance(gens, list) or not gens:
        ctx.fail("generators must be a nonempty list", "generators")
    generators = [_map(ctx, g, n, f"generators[{k}]") for k, g in enumerate(gens)]

    witnesses = None
    if "witnesses" in obj:
        ws = obj["witnesses"]
        if not isinstance(ws, list) or len(ws) != len(generators):
            ctx.fail("witnesses must list one entry (or null) per generator", "witnesses")
        witnesses = [None if w is None else _map(ctx, w, n, f"witnesses[{k}]") for k, w in enumerate(ws)]

    branches = obj.get("branches")
    if branches is not None:
        ok = isinstance(branches, list) and len(branches) == len(generators) and all(
            isinstance(b, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in b) for b in branches
        )
        if not ok:
            ctx.fail("branches must be one integer list per generator", "branches")

    normal_form = None
    if "normal_form" in obj:
        nf = obj["normal_form"]
        if not isinstance(nf, dict) or set(nf) != {"P", "eta"}:
            ctx.fail("normal_form needs keys P and eta", "normal_form")
        P = nf["P"]
        if not isinstance(P, list) or len(P) != n + 1 or any(not isinstance(r, list) or len(r) != n + 1 for r in P):
            ctx.fail(f"P must be {n + 1}x{n + 1}", "normal_form.P")
        eta = nf["eta"]
        if not isinstance(eta, list) or not all(isinstance(x, int) and x > 0 for x in eta) or sum(eta) != n + 1:
            ctx.fail(f"eta must be positive integers summing to {n + 1}", "normal_form.eta")
        normal_form = {
            "P": [[_entry(ctx, x, f"normal_form.P[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(P)],
            "eta": list(eta),
        }

    return ProblemFile(n, generators, symbols, independent, witnesses, branches, normal_form, mode, reg)


def load_problem(path) -> ProblemFile:
    p = Path(path)
    return parse_problem(p.read_text(), str(p))
