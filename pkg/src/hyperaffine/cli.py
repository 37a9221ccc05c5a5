"""Command line front end.

Exit codes (stable):

    0  valid file / Hypercyclic
    1  NotHypercyclic
    2  generators do not commute
    3  witness fails exp(Psi(f')) = Phi(f)
    4  Inconclusive
    5  malformed problem file (line/column reported when known)
    6  other domain error (non-invertible generator, bad normal form, numerical failure)
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .density import LATTICE_BOUND, LATTICE_PRECISION
from .errors import HyperaffineError, NotAbelian, WitnessError
from .explog import log_witness, verify_witness
from .normal_form import EIG_TOL, find_normal_form
from .orbit_sim import SimConfig, run, write_csv
from .pipeline import HYPERCYCLIC, NOT_HYPERCYCLIC, DecisionOptions, decide_hypercyclic, format_entry, matrix_json
from .problem import ProblemFormatError, load_problem

EXIT_OK = 0
EXIT_NOT_HYPERCYCLIC = 1
EXIT_NOT_ABELIAN = 2
EXIT_WITNESS = 3
EXIT_INCONCLUSIVE = 4
EXIT_PARSE = 5
EXIT_DOMAIN = 6

VERDICT_EXIT = {HYPERCYCLIC: EXIT_OK, NOT_HYPERCYCLIC: EXIT_NOT_HYPERCYCLIC}


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _normal_form(prob, fs, eig_tol: float):
    return prob.supplied_normal_form(fs) or find_normal_form(
        fs, eig_tol=eig_tol, method="float" if prob.mode == "numeric" else "auto", check=False
    )


def _guarded(fn):
    """Map library exceptions to exit codes."""

    def wrapper(args) -> int:
        try:
            return fn(args)
        except ProblemFormatError as exc:
            _err(f"{exc.path}: {exc}" if exc.path else str(exc))
            return EXIT_PARSE
        except NotAbelian as exc:
            _err(str(exc))
            return EXIT_NOT_ABELIAN
        except WitnessError as exc:
            _err(str(exc))
            return EXIT_WITNESS
        except (HyperaffineError, ValueError) as exc:
            _err(str(exc))
            return EXIT_DOMAIN

    return wrapper


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

@_guarded
def cmd_validate(args) -> int:
    from .affine import check_abelian

    prob = load_problem(args.file)
    fs = prob.maps()
    ok, pair, dev = check_abelian(fs)
    if not ok:
        raise NotAbelian(pair, dev)
    bad = [k for k, f in enumerate(fs) if not f.is_invertible()]
    if bad:
        _err(f"generators {bad} are not invertible; decide will reject this file")
        return EXIT_DOMAIN
    nf = prob.supplied_normal_form(fs)
    ws = prob.witness_maps() or []
    for k, (f, w) in enumerate(zip(fs, ws)):
        if w is not None:
            res = verify_witness(f, w, nf, index=k)
            print(f"witness {k}: ok (max deviation {res.deviation:.3g})")
    print(f"{args.file}: valid (n={prob.n}, p={len(fs)})")
    return EXIT_OK


def _options(args, prob) -> DecisionOptions:
    return DecisionOptions(
        mode=args.mode or prob.mode,
        eig_tol=args.eig_tol,
        lattice_bound=args.lattice_bound,
        lattice_precision=args.lattice_precision,
        accept_heuristic=args.accept_heuristic,
        use_shortcuts=not args.no_shortcuts,
        independent=prob.independent,
        branches=prob.branches,
    )


def decide_file(path: str, args) -> tuple[int, str]:
    """Run one decision; returns (exit code, rendered report)."""
    prob = load_problem(path)
    fs = prob.maps()
    opts = _options(args, prob)
    nf = prob.supplied_normal_form(fs)
    rep = decide_hypercyclic(fs, prob.witness_maps(), opts, nf)
    text = rep.to_json(timings=args.timings) if args.json else rep.to_text()
    return VERDICT_EXIT.get(rep.verdict, EXIT_INCONCLUSIVE), text


_decide_one = _guarded(lambda args: _print_decision(*decide_file(args.file, args)))


def _print_decision(code: int, text: str) -> int:
    print(text)
    return code


def _batch_worker(item):
    path, args = item
    try:
        return path, *decide_file(path, args)
    except ProblemFormatError as exc:
        return path, EXIT_PARSE, f"error: {exc}"
    except NotAbelian as exc:
        return path, EXIT_NOT_ABELIAN, f"error: {exc}"
    except WitnessError as exc:
        return path, EXIT_WITNESS, f"error: {exc}"
    except (HyperaffineError, ValueError) as exc:
        return path, EXIT_DOMAIN, f"error: {exc}"


def cmd_decide(args) -> int:
    if args.all is None:
        if args.file is None:
            _err("give a problem file or --all DIR")
            return EXIT_PARSE
        return _decide_one(args)
    files = sorted(str(p) for p in Path(args.all).glob("*.json"))
    if not files:
        _err(f"no .json files in {args.all}")
        return EXIT_PARSE
    items = [(f, args) for f in files]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(_batch_worker, items))
    worst = 0
    if args.json:
        print(json.dumps({"schema": 1, "results": [
            {"file": p, "exit": c, "report": json.loads(t) if t.startswith("{") else t} for p, c, t in results
        ]}, indent=2))
    for path, code, text in results:
        worst = max(worst, code)
        if not args.json:
            first = text.splitlines()[0] if text else ""
            print(f"{path}: exit {code}  {first}")
    return worst


@_guarded
def cmd_normal_form(args) -> int:
    prob = load_problem(args.file)
    fs = prob.maps()
    nf = _normal_form(prob, fs, args.eig_tol)
    if args.json:
        print(json.dumps({"schema": 1, "P": matrix_json(nf.P), "eta": list(nf.eta), "r": nf.r,
                          "w0": matrix_json(nf.w0), "method": nf.method, "notes": nf.notes}, indent=2))
    else:
        print(f"eta = {tuple(nf.eta)}, r = {nf.r} ({nf.method})")
        print("P =")
        for row in nf.P:
            print("  [" + ", ".join(format_entry(x) for x in row) + "]")
        print("w0 = (" + ", ".join(format_entry(x) for x in nf.w0) + ")")
        for note in nf.notes:
            print(f"note: {note}")
    return EXIT_OK


@_guarded
def cmd_witness(args) -> int:
    prob = load_problem(args.file)
    fs = prob.maps()
    nf = _normal_form(prob, fs, args.eig_tol)
    supplied = prob.witness_maps() or [None] * len(fs)
    out = []
    for k, (f, w) in enumerate(zip(fs, supplied)):
        if w is not None:
            lw = verify_witness(f, w, nf, index=k)
        else:
            br = prob.branches[k] if prob.branches else None
            lw = log_witness(f, nf, br)
        out.append(lw)
    if args.json:
        print(json.dumps({"schema": 1, "witnesses": [
            {"A": matrix_json(w.fprime.A), "a": matrix_json(w.fprime.a), "branch_shifts": w.branch_shifts,
             "supplied": w.supplied, "exp_deviation": w.deviation} for w in out
        ]}, indent=2))
    else:
        for k, w in enumerate(out):
            tag = "verified" if w.supplied else "computed"
            print(f"f'_{k + 1}: {tag}, branch shifts {w.branch_shifts}, exp deviation {w.deviation:.3g}")
            print("  A = " + "; ".join(", ".join(format_entry(x) for x in row) for row in w.fprime.A))
            print("  a = " + ", ".join(format_entry(x) for x in w.fprime.a))
    return EXIT_OK


@_guarded
def cmd_simulate(args) -> int:
    prob = load_problem(args.file)
    fs = prob.maps()
    if args.start is not None:
        start = np.array([complex(s) for s in args.start.split(",")])
    else:
        start = np.asarray([complex(x) for x in _normal_form(prob, fs, args.eig_tol).w0])
    cfg = SimConfig(budget=args.budget, box_radius=args.box, grid=args.grid, seed=args.seed,
                    start=start, group=args.group)
    res = run(fs, cfg)
    if args.csv:
        write_csv(res, args.csv)
    print("budget,points,coverage,escape_fraction")
    for c in res.checkpoints:
        print(f"{c.budget},{c.points},{c.coverage:.6f},{c.escape_fraction:.6f}")
    print(f"heuristic: {res.cells_hit}/{res.cells_total} cells hit; audit {res.audit_failures}"
          f"/{res.audit_checked} mismatches; {res.escaped} escaped", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperaffine", description="Hypercyclicity of commuting affine maps on C^n.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="JSON problem file")
        p.add_argument("--eig-tol", type=float, default=EIG_TOL, help="eigenvalue clustering tolerance")

    p = sub.add_parser("validate", help="check dimensions, commutativity, invertibility, witnesses")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decide", help="decide hypercyclicity")
    p.add_argument("file", nargs="?")
    p.add_argument("--eig-tol", type=float, default=EIG_TOL)
    p.add_argument("--mode", choices=["auto", "exact", "numeric"], default=None, help="override the file's mode")
    p.add_argument("--lattice-bound", type=int, default=LATTICE_BOUND, help="max |s_j| for numeric relations")
    p.add_argument("--lattice-precision", type=int, default=LATTICE_PRECISION, help="lattice scale 10^k")
    p.add_argument("--accept-heuristic", action="store_true", help="treat a numeric Dense as Hypercyclic")
    p.add_argument("--no-shortcuts", action="store_true", help="run the full density computation")
    p.add_argument("--json", action="store_true")
    p.add_argument("--timings", action="store_true", help="include timings in JSON output")
    p.add_argument("--all", metavar="DIR", help="decide every *.json in DIR in parallel")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("normal-form", help="block-triangular normal form and w0")
    common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_normal_form)

    p = sub.add_parser("witness", help="verify or compute log witnesses f'")
    common(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("simulate", help="empirical orbit coverage (heuristic)")
    common(p)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--box", type=float, default=2.0, help="box half-width R")
    p.add_argument("--grid", type=int, default=8, help="cells per real axis")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write checkpoint rows here")
    p.add_argument("--start", help="comma-separated complex start vector (default w0)")
    p.add_argument("--group", action="store_true", help="also apply generator inverses")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
