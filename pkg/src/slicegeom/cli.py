"""Command-line front end.

Every command writes `<out>/<stem>.csv` (fixed header, one comment line
with the timestamp and budget) and `<out>/<stem>.json` (witnesses). The
output directory defaults to $SLICEGEOM_OUT, else the working directory.

Exit codes: 0 success, 2 validation failure, 3 invariant violation.
"""
import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys

import numpy as np

from . import criterion as C
from . import midpoints as MP
from . import sandbox as SB
from . import slices as SL
from . import spaces as S
from .budget import SolverBudget
from .errors import (InvalidSpace, InvariantViolation, NotFound,
                     NotSeparated, SliceGeomError)

HEADER = ["space_id", "op", "n", "alpha", "depth", "eps", "value", "lower",
          "upper", "certified", "seed", "budget_samples"]
OUT_ENV = "SLICEGEOM_OUT"
EXIT_OK, EXIT_INVALID, EXIT_INVARIANT = 0, 2, 3


# -- grids and formatting ---------------------------------------------------

def int_grid(text):
    """'1..4' -> [1, 2, 3, 4]; '1,3' -> [1, 3]."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..")
        a, b = int(a), int(b)
        if b < a:
            raise argparse.ArgumentTypeError("empty range %s" % text)
        return list(range(a, b + 1))
    return [int(t) for t in text.split(",") if t.strip()]


def real_grid(text):
    return [float(t) for t in text.split(",") if t.strip()]


def vector(text):
    return np.array(real_grid(text))


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return "%.12g" % v


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    raise TypeError(type(o).__name__)


class Sink:
    """Collects rows and witnesses; writes both in input order at the end."""

    def __init__(self, args, stem):
        self.args = args
        self.stem = stem
        self.rows = []
        self.witness = {"command": stem, "budget": budget_of(args).as_dict(),
                        "records": []}

    def row(self, space_id, op, n=None, alpha=None, depth=None, eps=None,
            value=None, lower=None, upper=None, certified=False):
        b = budget_of(self.args)
        self.rows.append([space_id, op, fmt(n), fmt(alpha), fmt(depth),
                          fmt(eps), fmt(value), fmt(lower), fmt(upper),
                          fmt(bool(certified)), fmt(b.seed),
                          fmt(b.samples)])

    def record(self, **kw):
        self.witness["records"].append(kw)

    def body(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(self.rows)
        return buf.getvalue()

    def write(self):
        out = self.args.out or os.environ.get(OUT_ENV) or "."
        os.makedirs(out, exist_ok=True)
        stem = self.args.stem or self.stem
        b = budget_of(self.args)
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(
            timespec="seconds")
        comment = "# %s %s %s\n" % (stem, stamp, json.dumps(
            b.as_dict(), sort_keys=True))
        csv_path = os.path.join(out, stem + ".csv")
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(comment)
            fh.write(self.body())
        with open(os.path.join(out, stem + ".json"), "w",
                  encoding="utf-8") as fh:
            json.dump(self.witness, fh, indent=1, default=_jsonable,
                      sort_keys=True)
            fh.write("\n")
        if not self.args.quiet:
            sys.stdout.write(self.body())
        return csv_path


def budget_of(args):
    b = SolverBudget()
    kw = {}
    for name in ("samples", "starts", "iterations", "resolution", "angular",
                 "seed", "workers", "margin", "max_dim"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return b.with_(**kw)


def load_space(path):
    spec = S.load(path)
    rep = S.validate(spec)
    if not rep.ok:
        raise InvalidSpace(rep)
    return spec


# -- commands ---------------------------------------------------------------

def cmd_space(args):
    sink = Sink(args, "space-" + args.action)
    status = EXIT_OK
    for path in args.files:
        spec = S.load(path)
        rep = S.validate(spec)
        if args.action == "validate":
            sink.row(spec.label, "validate", value=1 if rep.ok else 0,
                     certified=True)
            sink.record(space=spec.label, path=path, ok=rep.ok,
                        errors=rep.errors)
            if not rep.ok:
                status = EXIT_INVALID
                for e in rep.errors:
                    sys.stderr.write("%s: %s\n" % (path, e))
            continue
        if not rep.ok:
            raise InvalidSpace(rep)
        info = {"space": spec.label, "kind": spec.kind, "dim": spec.dim,
                "polytopal": spec.polytopal, "spec": S.to_dict(spec)}
        if spec.polytopal and spec.dim <= budget_of(args).max_dim:
            V = S.ball_vertices(spec, budget_of(args).max_dim)
            info["vertices"] = V
            info["facets"] = len(spec.rows)
            sink.row(spec.label, "vertex-count", value=len(V),
                     certified=True)
        sink.record(**info)
    sink.write()
    return status


def cmd_slice(args):
    spec = load_space(args.space)
    b = budget_of(args)
    sink = Sink(args, "slice-" + args.action)
    sid = spec.label
    status = EXIT_OK
    if args.action == "diam":
        for depth in args.depth:
            sl = SL.make_slice(spec, args.functional, depth)
            r = SL.slice_diameter(sl, b)
            sink.row(sid, "slice-diam", depth=depth, value=r.upper,
                     lower=r.lower, upper=r.upper, certified=r.certified)
            sink.record(depth=depth, functional=sl.functional,
                        diameter=r.upper, certified=r.certified,
                        witness=list(r.witness))
    elif args.action == "min-diam":
        for depth in args.depth:
            r = SL.min_slice_diameter(spec, depth, b)
            sink.row(sid, "slice-min-diam", depth=depth, value=r.upper,
                     lower=r.lower, upper=r.upper,
                     certified=r.upper_certified and r.lower_certified)
            sink.record(depth=depth, functional=r.functional,
                        upper=r.upper, lower=r.lower,
                        upper_certified=r.upper_certified,
                        lower_certified=r.lower_certified,
                        witness=list(r.witness))
    elif args.action == "witness-spread":
        sl = SL.make_slice(spec, args.functional, args.depth[0])
        try:
            u, v = SL.slice_spread_witness(sl, args.alpha, args.eps, b)
            d = S.norm(spec, u - v)
            if not (sl.contains(u) and sl.contains(v)
                    and d >= args.alpha - args.eps - 1e-9):
                raise InvariantViolation("spread witness failed re-check")
            sink.row(sid, "witness-spread", alpha=args.alpha,
                     depth=sl.depth, eps=args.eps, value=d, lower=d,
                     certified=True)
            sink.record(status="found", u=u, v=v, distance=d)
        except NotFound as e:
            sink.row(sid, "witness-spread", alpha=args.alpha,
                     depth=sl.depth, eps=args.eps, certified=False)
            sink.record(status="not_found", reason=str(e))
    elif args.action == "witness-separate":
        try:
            sep = SL.separating_slice(spec, args.x0, args.alpha, args.eps, b)
            r = SL.slice_diameter(sep.slice, b)
            bound = args.alpha - args.eps
            if r.upper > bound + 1e-6:
                status = EXIT_INVARIANT
                sys.stderr.write("separated slice has diameter %.12g > %.12g\n"
                                 % (r.upper, bound))
            sink.row(sid, "witness-separate", alpha=args.alpha,
                     depth=sep.slice.depth, eps=args.eps, value=r.upper,
                     lower=r.lower, upper=r.upper, certified=r.certified)
            sink.record(status="separated", functional=sep.slice.functional,
                        depth=sep.slice.depth, gap=sep.gap,
                        support=sep.support_value, diameter=r.upper,
                        witness=list(r.witness))
        except NotSeparated as e:
            sink.row(sid, "witness-separate", alpha=args.alpha,
                     eps=args.eps, certified=False)
            sink.record(status="not_separated", reason=str(e))
    sink.write()
    return status


def cmd_cn_alpha(args):
    spec = load_space(args.space)
    b = budget_of(args)
    sink = Sink(args, "cn-alpha")
    for a in args.alpha:
        for n in args.n:
            e = MP.cn_alpha(spec, n, a, b, oracle=not args.no_oracle)
            sink.row(spec.label, "cn-alpha", n=n, alpha=a,
                     value=e.empirical_value, lower=e.certified_lower,
                     upper=e.empirical_value,
                     certified=e.certified_lower is not None)
            sink.record(**e.to_dict())
    sink.write()
    return EXIT_OK


def _profile(spec, args, nmax):
    return C.decay_profile(spec, args.alpha, nmax, budget_of(args),
                           oracle=not args.no_oracle)


def _profile_rows(sink, p, op="decay"):
    for i, a in enumerate(p.alphas):
        for j, n in enumerate(p.ns):
            low = p.lowers[i, j]
            sink.row(p.space_id, op, n=n, alpha=a, value=p.cleaned[i, j],
                     lower=low, upper=p.raw[i, j],
                     certified=not math.isnan(low))


def cmd_decay(args):
    spec = load_space(args.space)
    p = _profile(spec, args, args.nmax)
    sink = Sink(args, "decay")
    _profile_rows(sink, p)
    sink.record(profile=p.to_dict(),
                witnesses=[[e.to_dict() for e in row] for row in p.estimates])
    sink.write()
    return EXIT_OK


def cmd_verdict(args):
    spec = load_space(args.space)
    p = _profile(spec, args, max(2, spec.dim + 1))
    v = C.uniform_verdict(p, args.theta)
    sink = Sink(args, "verdict")
    _profile_rows(sink, p, "verdict")
    sink.record(space=spec.label, surrogate="none", theta=args.theta,
                table=p.to_dict(), verdict=v.verdict, evidence=v.evidence)
    sink.write()
    if not args.quiet:
        sys.stdout.write("verdict: %s\n" % v.verdict)
    return EXIT_OK


def cmd_sequence(args):
    specs = [load_space(f) for f in args.space]
    level = args.alpha[0] - args.eps
    nargs = argparse.Namespace(**vars(args))
    nargs.alpha = sorted(set([level] + list(args.alpha)))
    profiles = [_profile(s, nargs, args.nmax) for s in specs]
    sur = C.FilterSurrogate(args.surrogate)
    rep = C.sequence_criterion(profiles, args.alpha[0], args.eps, args.delta,
                               sur)
    sink = Sink(args, "sequence")
    for d, n in rep.table:
        sink.row("family[%d]" % len(specs), "sequence", n=n,
                 alpha=args.alpha[0], eps=args.eps, value=d,
                 certified=False)
    sink.record(report=rep.to_dict(), profiles=[p.to_dict()
                                                for p in profiles])
    sink.write()
    return EXIT_OK


def _step(path):
    with open(path, encoding="utf-8") as fh:
        return SB.StepFunction.from_dict(json.load(fh))


def cmd_sandbox(args):
    sink = Sink(args, "sandbox-" + args.action)
    status = EXIT_OK
    if args.action == "dm":
        f = _step(args.f)
        g = _step(args.g) if args.g else SB.StepFunction.constant(0.0)
        v = SB.dm(f, g)
        sink.row("L1", "dm", value=v, lower=v, upper=v, certified=True)
        sink.record(f=f, g=g, dm=v)
    elif args.action == "calculus":
        rng = np.random.default_rng([budget_of(args).seed, 99])
        bad = 0
        worst = math.inf
        for i in range(args.count):
            fs = [SB.random_step(rng) for _ in range(int(rng.integers(2, 4)))]
            lams = list(rng.random(3))
            r = SB.check_dm_calculus(fs, lams)
            # triangle inequality through the translation identity
            f, g, h = SB.random_step(rng), SB.random_step(rng), \
                SB.random_step(rng)
            tri = SB.dm(f, h) <= SB.dm(f, g) + SB.dm(g, h)
            bad += len(r.violations) + (0 if tri else 1)
            worst = min(worst, r.min_margin)
        sink.row("L1", "dm-calculus", n=args.count, value=bad, lower=worst,
                 certified=bad == 0)
        sink.record(instances=args.count, violations=bad, min_margin=worst)
        if bad:
            status = EXIT_INVARIANT
    elif args.action == "spikes":
        for s in args.s:
            for n in args.n:
                r = SB.spike_average_deficit(s, n)
                sink.row("L1", "spike-deficit", n=n, depth=s, value=r.value,
                         lower=r.value, upper=r.value,
                         certified=r.grid is not None)
                sink.record(s=s, n=n, exact=str(r.exact),
                            grid=None if r.grid is None else str(r.grid))
    elif args.action == "near-disjoint":
        one = SB.StepFunction.constant(1.0)
        rep = SB.near_disjointness_scan([one], args.eps, args.probes,
                                        budget_of(args).seed)
        sink.row("L1", "near-disjoint", eps=args.eps, value=rep.delta,
                 certified=False)
        sink.record(delta=rep.delta, all_passed=rep.all_passed,
                    collapsed=rep.collapsed, log=rep.log)
    sink.write()
    return status


def cmd_report(args):
    with open(args.input, encoding="utf-8") as fh:
        data = json.load(fh)
    out = args.out or os.environ.get(OUT_ENV) or "."
    os.makedirs(out, exist_ok=True)
    rows = []
    for rec in data.get("records", []):
        prof = rec.get("profile") or rec.get("table")
        if not prof:
            continue
        for i, a in enumerate(prof["alphas"]):
            for j, n in enumerate(prof["ns"]):
                low = prof["certified_lower"][i][j]
                rows.append([prof["space"], fmt(a), fmt(n),
                             fmt(prof["raw"][i][j]),
                             fmt(prof["cleaned"][i][j]), fmt(low)])
    path = os.path.join(out, (args.stem or "plot-data") + ".csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["space_id", "alpha", "n", "raw", "cleaned",
                    "certified_lower"])
        w.writerows(rows)
    if not args.quiet:
        sys.stdout.write(path + "\n")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _budget_flags(p):
    g = p.add_argument_group("budget")
    g.add_argument("--seed", type=int)
    g.add_argument("--samples", type=int)
    g.add_argument("--starts", type=int)
    g.add_argument("--iterations", type=int)
    g.add_argument("--resolution", type=int)
    g.add_argument("--angular", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--margin", type=float)
    g.add_argument("--max-dim", dest="max_dim", type=int)
    p.add_argument("--out", help="output directory (default $%s)" % OUT_ENV)
    p.add_argument("--stem", help="output file stem")
    p.add_argument("--quiet", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(prog="slicegeom", description=__doc__,
                                 formatter_class=argparse.RawTextHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space")
    sp.add_argument("action", choices=["validate", "info"])
    sp.add_argument("files", nargs="+")
    _budget_flags(sp)
    sp.set_defaults(fn=cmd_space)

    sl = sub.add_parser("slice")
    sl.add_argument("action", choices=["diam", "min-diam", "witness-spread",
                                       "witness-separate"])
    sl.add_argument("--space", required=True)
    sl.add_argument("--functional", type=vector)
    sl.add_argument("--depth", type=real_grid, default=[0.1])
    sl.add_argument("--alpha", type=float)
    sl.add_argument("--eps", type=float)
    sl.add_argument("--x0", type=vector)
    _budget_flags(sl)
    sl.set_defaults(fn=cmd_slice)

    cn = sub.add_parser("cn-alpha")
    cn.add_argument("--space", required=True)
    cn.add_argument("--alpha", type=real_grid, required=True)
    cn.add_argument("--n", type=int_grid, required=True)
    cn.add_argument("--no-oracle", action="store_true")
    _budget_flags(cn)
    cn.set_defaults(fn=cmd_cn_alpha)

    de = sub.add_parser("decay")
    de.add_argument("--space", required=True)
    de.add_argument("--alpha", type=real_grid, required=True)
    de.add_argument("--nmax", type=int, default=4)
    de.add_argument("--no-oracle", action="store_true")
    _budget_flags(de)
    de.set_defaults(fn=cmd_decay)

    ve = sub.add_parser("verdict")
    ve.add_argument("--space", required=True)
    ve.add_argument("--alpha", type=real_grid, required=True)
    ve.add_argument("--theta", type=float, default=C.THETA)
    ve.add_argument("--no-oracle", action="store_true")
    _budget_flags(ve)
    ve.set_defaults(fn=cmd_verdict)

    se = sub.add_parser("sequence")
    se.add_argument("--space", nargs="+", required=True)
    se.add_argument("--alpha", type=real_grid, required=True)
    se.add_argument("--eps", type=float, required=True)
    se.add_argument("--delta", type=real_grid, required=True)
    se.add_argument("--nmax", type=int, default=3)
    se.add_argument("--surrogate", choices=["frechet", "density"],
                    default="frechet")
    se.add_argument("--no-oracle", action="store_true")
    _budget_flags(se)
    se.set_defaults(fn=cmd_sequence)

    sb = sub.add_parser("sandbox")
    sb.add_argument("action", choices=["dm", "calculus", "spikes",
                                       "near-disjoint"])
    sb.add_argument("--f")
    sb.add_argument("--g")
    sb.add_argument("--count", type=int, default=1000)
    sb.add_argument("--s", type=real_grid, default=[0.5, 0.25, 0.125])
    sb.add_argument("--n", type=int_grid, default=list(range(1, 9)))
    sb.add_argument("--eps", type=float, default=0.1)
    sb.add_argument("--probes", type=int, default=10)
    _budget_flags(sb)
    sb.set_defaults(fn=cmd_sandbox)

    rp = sub.add_parser("report")
    rp.add_argument("action", choices=["plot-data"])
    rp.add_argument("--input", required=True)
    rp.add_argument("--out")
    rp.add_argument("--stem")
    rp.add_argument("--quiet", action="store_true")
    rp.set_defaults(fn=cmd_report)
    return ap


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InvalidSpace as e:
        sys.stderr.write("invalid space: %s\n" % e)
        return EXIT_INVALID
    except InvariantViolation as e:
        sys.stderr.write("invariant violation: %s\n" % e)
        return EXIT_INVARIANT
    except (SliceGeomError, ValueError) as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
