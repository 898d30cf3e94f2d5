"""Compare C_{n^2}^alpha of X (+)_p Y with the combined component bound.

Components default to the max-norm plane; the sum exponent is varied.
"""
import argparse
import csv
import math
import sys

from slicegeom import spaces as S
from slicegeom.budget import SolverBudget
from slicegeom.midpoints import cn_alpha


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--p", default="1,2,inf")
    ap.add_argument("--samples", type=int, default=16)
    args = ap.parse_args(argv)
    b = SolverBudget(samples=args.samples, starts=2)
    X = S.lp(2, math.inf)
    cx = cn_alpha(X, args.n, args.alpha, b, oracle=False).empirical_value
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p", "n", "component", "sum_value", "bound"])
    for tok in args.p.split(","):
        p = float(tok)
        spec = S.lp_sum(X, X, p)
        v = cn_alpha(spec, args.n ** 2, args.alpha, b,
                     oracle=False).empirical_value
        bound = cx if math.isinf(p) else (2 * cx ** p) ** (1 / p)
        w.writerow([tok, args.n, "%.6g" % cx, "%.6g" % v, "%.6g" % bound])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
