"""C_{dim+1}^alpha of Lip_0 over dyadic grid metrics, next to 4/n."""
import argparse
import csv
import sys

from slicegeom import spaces as S
from slicegeom.budget import SolverBudget
from slicegeom.midpoints import cn_alpha


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=1.9)
    ap.add_argument("--samples", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    b = SolverBudget(samples=args.samples, starts=2, seed=args.seed)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["k", "dim", "n", "alpha", "value", "four_over_n",
                "eps_needed"])
    for k in range(1, args.kmax + 1):
        spec = S.lip(S.grid_metric(k))
        n = spec.dim + 1
        v = cn_alpha(spec, n, args.alpha, b, oracle=False).empirical_value
        w.writerow([k, spec.dim, n, args.alpha, "%.6g" % v, "%.6g" % (4 / n),
                    "%.6g" % max(0.0, v - 4 / n)])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
