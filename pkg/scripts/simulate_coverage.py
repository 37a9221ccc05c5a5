"""Orbit coverage of a problem file at increasing budgets, written as CSV.

Runs the semigroup orbit and, with --group, the orbit of the generated group
for comparison.
"""

import argparse
import sys
from pathlib import Path

from hyperaffine.linalg import to_complex
from hyperaffine.normal_form import find_normal_form
from hyperaffine.orbit_sim import SimConfig, run, write_csv
from hyperaffine.problem import load_problem

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--file", default=str(ROOT / "problems" / "golden_dense_n2.json"))
    ap.add_argument("--budget", type=int, default=100_000)
    ap.add_argument("--box", type=float, default=2.0)
    ap.add_argument("--grid", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--group", action="store_true", help="also run with generator inverses")
    ap.add_argument("--out", default="coverage.csv")
    args = ap.parse_args(argv)

    prob = load_problem(args.file)
    fs = prob.maps()
    nf = prob.supplied_normal_form(fs) or find_normal_form(fs)
    start = to_complex(nf.w0)
    modes = [False, True] if args.group else [False]
    for group in modes:
        cfg = SimConfig(budget=args.budget, box_radius=args.box, grid=args.grid, seed=args.seed,
                        start=start, group=group)
        res = run(fs, cfg)
        out = Path(args.out)
        if group:
            out = out.with_name(out.stem + "_group" + out.suffix)
        write_csv(res, out)
        label = "group" if group else "semigroup"
        print(f"{label}: coverage {res.coverage:.4f} ({res.cells_hit}/{res.cells_total} cells), "
              f"escape fraction {res.escape_fraction:.3f}, audit {res.audit_failures}/{res.audit_checked} -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
