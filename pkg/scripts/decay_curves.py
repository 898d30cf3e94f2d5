"""Cleaned decay tables for the bundled 2D spaces, as one long CSV."""
import argparse
import csv
import glob
import os
import sys

from slicegeom import spaces as S
from slicegeom.budget import SolverBudget
from slicegeom.criterion import decay_profile

HERE = os.path.dirname(os.path.abspath(__file__))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spaces", nargs="*")
    ap.add_argument("--alpha", default="0.5,1,1.5,2")
    ap.add_argument("--nmax", type=int, default=4)
    ap.add_argument("--samples", type=int, default=16)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    paths = args.spaces or sorted(
        glob.glob(os.path.join(HERE, "..", "data", "spaces", "*-2d.json"))
        + [os.path.join(HERE, "..", "data", "spaces", "hexagon.json")])
    alphas = [float(a) for a in args.alpha.split(",")]
    b = SolverBudget(samples=args.samples, starts=2, workers=args.workers)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["space_id", "alpha", "n", "raw", "cleaned",
                "certified_lower"])
    for path in paths:
        spec = S.load(path)
        p = decay_profile(spec, alphas, args.nmax, b)
        for i, a in enumerate(p.alphas):
            for j, n in enumerate(p.ns):
                low = p.lowers[i, j]
                w.writerow([spec.label, a, n, "%.6g" % p.raw[i, j],
                            "%.6g" % p.cleaned[i, j],
                            "" if low != low else "%.6g" % low])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
