#!/usr/bin/env python3
"""Residual-vs-resolution sweeps across filter families.

Produces one CSV per family (N, residual, coefficient norm, plunge rank) plus
a printed log-log slope, reproducing the basic convergence experiment:

    python3 scripts/convergence_sweep.py --out results/ \
        --families cdf22 cdf33 cdf44 --domain interval:0,0.5 \
        --function exp1d --N 64 128 256 512 1024
"""

import argparse
import pathlib
import sys

import numpy as np

from wavext.cli import RunConfig, cmd_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", nargs="+", default=["cdf22", "cdf33", "cdf44"])
    ap.add_argument("--domain", default="interval:0,0.5")
    ap.add_argument("--function", default="exp1d")
    ap.add_argument("--solver", default="reduced")
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--N", nargs="+", type=int,
                    default=[64, 128, 256, 512, 1024])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for fam in args.families:
        dest = outdir / f"convergence_{fam}.csv"
        cfg = RunConfig(command="convergence", family=fam, q=(args.q,),
                        domain=args.domain, function=args.function,
                        solver=args.solver, seed=args.seed,
                        output=str(dest)).validate()
        cmd_convergence(cfg, args.N)
        rows = np.loadtxt(dest, delimiter=",", skiprows=1)
        slope = np.polyfit(np.log(rows[:, 0]), np.log(rows[:, 1]), 1)[0]
        print(f"{fam}: wrote {dest}  (residual slope {slope:.2f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
