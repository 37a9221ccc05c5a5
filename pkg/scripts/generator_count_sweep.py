"""Random commuting families with p generators on C^n: verdict counts per (n, p).

Shortcuts are disabled, so every family goes through the full density
decision.  Rational families are never hypercyclic.  The table shows which
obstruction is reported: column deficit while p + r - 1 <= 2n, then a rank
deficit or an integer vector in the row space.
"""

import argparse
import csv
import sys
import time
from collections import Counter

import numpy as np

from hyperaffine.pipeline import DecisionOptions, decide_hypercyclic
from hyperaffine.random_families import commuting_family


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--max-p", type=int, default=6)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", help="write rows (n, p, verdict, reason, count) here")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    opts = DecisionOptions(use_shortcuts=False, accept_heuristic=False)
    rows = []
    t0 = time.perf_counter()
    for n in range(1, args.max_n + 1):
        for p in range(1, args.max_p + 1):
            tally: Counter = Counter()
            for _ in range(args.trials):
                fs, _, _ = commuting_family(rng, n, p, positive=True)
                rep = decide_hypercyclic(fs, options=opts)
                reason = rep.density_verdict.reason if rep.density_verdict else rep.reason
                tally[(rep.verdict, reason)] += 1
            for (verdict, reason), count in sorted(tally.items()):
                rows.append((n, p, verdict, reason, count))
                print(f"n={n} p={p}: {count:3d} x {verdict} ({reason})")
    print(f"{time.perf_counter() - t0:.1f} s", file=sys.stderr)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "p", "verdict", "reason", "count"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
