"""Decide the golden two-dimensional fixture and print the report."""

import argparse
import sys
import time
from pathlib import Path

from hyperaffine.pipeline import DecisionOptions, decide_hypercyclic
from hyperaffine.problem import load_problem

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--file", default=str(ROOT / "problems" / "golden_dense_n2.json"))
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    prob = load_problem(args.file)
    fs = prob.maps()
    t0 = time.perf_counter()
    rep = decide_hypercyclic(fs, prob.witness_maps(), DecisionOptions(mode=prob.mode), prob.supplied_normal_form(fs))
    elapsed = time.perf_counter() - t0
    print(rep.to_json(timings=True) if args.json else rep.to_text())
    print(f"decided in {elapsed:.3f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
