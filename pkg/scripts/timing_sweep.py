#!/usr/bin/env python3
"""Wall-time scaling of the solver pipelines.

Times each requested pipeline over a dyadic sweep of N and reports the
log-log slope of median runtime, e.g.

    python3 scripts/timing_sweep.py --solvers az reduced sparse \
        --N 1024 4096 16384 65536 --out results/
"""

import argparse
import pathlib
import sys

from wavext.cli import RunConfig, cmd_timing


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--solvers", nargs="+", default=["az", "reduced", "sparse"])
    ap.add_argument("--family", default="cdf33")
    ap.add_argument("--domain", default="interval:0,0.5")
    ap.add_argument("--function", default="exp1d")
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--N", nargs="+", type=int,
                    default=[1024, 4096, 16384, 65536])
    ap.add_argument("--repetitions", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for solver in args.solvers:
        dest = outdir / f"timing_{solver}.csv"
        cfg = RunConfig(command="timing", family=args.family, q=(args.q,),
                        domain=args.domain, function=args.function,
                        solver=solver, seed=args.seed,
                        output=str(dest)).validate()
        cmd_timing(cfg, args.N, args.repetitions)
        print(f"{solver}: wrote {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
