"""Acceptance suite, one test per criterion.

Each test records a PASS/FAIL line that pytest prints in its terminal
summary. Run directly with `python tests/test_acceptance.py`.
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from slicegeom import cli
from slicegeom import spaces as S
from slicegeom.budget import SolverBudget
from slicegeom.criterion import (CERTIFIED_FAILURE, agrees_with_verdict,
                                 decay_profile, sequence_criterion,
                                 uniform_verdict)
from slicegeom.midpoints import (cn_alpha, combination_value, combine_lp_sum,
                                 dist_to_midpoint_hull, lp_sum_errors)
from slicegeom.oracle import oracle_dist_2d
from slicegeom.sandbox import (StepFunction, check_dm_calculus, dm, l1_norm,
                               random_step, spike_average_deficit,
                               spike_family)
from slicegeom.slices import (make_slice, separating_slice, slice_diameter,
                              slice_spread_witness)

from conftest import INF, random_polygon, record, space_zoo
from oracles import (binomial_deficit_float, brute_slice_diameter,
                     euclid_chord, euclid_cn, euclid_support)

ALPHAS = [0.5, 1.0, 1.5, 2.0]
NS = [1, 2, 3, 4]
DATA = os.path.join(os.path.dirname(__file__), "..", "data", "spaces")


def _finish(number, title, failures, detail=""):
    record(number, title, not failures, detail or "; ".join(failures[:3]))
    assert not failures, failures


def test_c01_euclidean_closed_form():
    l2 = S.lp(2, 2, name="l2-2d")
    bad = []
    # ground truth first: the oracle bracket must contain the formula
    for a in ALPHAS:
        for n in (1, 3):
            br = oracle_dist_2d(l2, [1, 0], n, a, 2048)
            if not (br.lower - 1e-12 <= euclid_cn(a) <= br.upper + 1e-12):
                bad.append("oracle a=%g n=%d [%.5g, %.5g]"
                           % (a, n, br.lower, br.upper))
    # the disc is rotation invariant, so a few sample points suffice
    b = SolverBudget(samples=4, starts=3)
    worst = 0.0
    for a in ALPHAS:
        for n in NS:
            v = cn_alpha(l2, n, a, b, oracle=False).empirical_value
            worst = max(worst, abs(v - euclid_cn(a)))
    if worst > 1e-3:
        bad.append("max error %.3g" % worst)
    _finish(1, "Euclidean closed form", bad, "max error %.2e" % worst)


def test_c02_max_norm_values():
    linf = S.lp(2, INF, name="linf-2d")
    b = SolverBudget(samples=8, resolution=512)
    bad = []
    for n, want in zip(NS, [1.0, 0.5, 0.5, 0.5]):
        est = cn_alpha(linf, n, 2.0, b)
        if abs(est.empirical_value - want) > 1e-3:
            bad.append("n=%d value %.6g" % (n, est.empirical_value))
        if not (est.certified_lower <= want <= est.oracle_upper + 1e-12):
            bad.append("n=%d oracle [%.5g, %.5g]"
                       % (n, est.certified_lower, est.oracle_upper))
    _finish(2, "max-norm exact values", bad)


def test_c03_chord_formula():
    l2 = S.lp(2, 2)
    b = SolverBudget(starts=8)
    bad = []
    for a in (0.1, 0.5, 1.0):
        for th in (0.0, 1.1):
            r = slice_diameter(make_slice(l2, [np.cos(th), np.sin(th)], a), b)
            if abs(r.upper - euclid_chord(a)) > 1e-6:
                bad.append("depth %g: %.9g" % (a, r.upper))
    rng = np.random.default_rng(2024)
    for i in range(20):
        spec = random_polygon(rng)
        sl = make_slice(spec, rng.standard_normal(2),
                        float(rng.uniform(0.05, 1.5)))
        r = slice_diameter(sl, b)
        brute, h = brute_slice_diameter(S.ball_vertices(spec),
                                        lambda z: S.norm(spec, z),
                                        sl.functional, 1 - sl.depth)
        # boundary spacing h moves each endpoint by at most h in the
        # Euclidean metric; 3h bounds that in these polygon norms
        if not (brute <= r.upper + 1e-9 and r.upper - brute <= 6 * h):
            bad.append("polygon %d: exact %.6g brute %.6g" % (i, r.upper,
                                                             brute))
    _finish(3, "slice diameter chord formula", bad)


def test_c04_separation_and_spread():
    b = SolverBudget(samples=12, starts=8)
    bad = []
    l2 = S.lp(2, 2)
    x0 = np.array([1.0, 0.0])
    sep = separating_slice(l2, x0, 1.9, 0.1, b)
    sl = sep.slice
    if not sl.contains(x0, closed=False):
        bad.append("x0 outside the slice")
    r = slice_diameter(sl, b)
    if r.upper > 1.8 + 1e-3:
        bad.append("diameter %.6g" % r.upper)
    # independent check: the cap diameter from its depth
    if abs(euclid_chord(sl.depth) - r.upper) > 1e-6:
        bad.append("chord mismatch")
    # S^1.8 is the disc of radius sqrt(1 - 0.81): it must sit below the level
    if sl.level() < euclid_support(1.8):
        bad.append("level %.6g cuts S^1.8" % sl.level())
    for u in sep.atoms:
        if float(np.dot(sl.functional, u)) > sl.level() + 1e-12:
            bad.append("atom inside the slice")
            break
    # x0 itself must clear the level
    if float(np.dot(sl.functional, x0)) <= sl.level():
        bad.append("x0 below level")
    linf = S.lp(2, INF)
    sq = make_slice(linf, [1, 0], 0.2)
    u, v = slice_spread_witness(sq, 2.0, 0.01, b)
    d = float(np.max(np.abs(np.asarray(u) - np.asarray(v))))
    for p in (u, v):
        if max(abs(p[0]), abs(p[1])) > 1 + 1e-9 or p[0] < 0.8 - 1e-9:
            bad.append("witness outside the slice")
    if d < 1.99:
        bad.append("spread %.6g" % d)
    _finish(4, "separation and spread witnesses", bad,
            "diameter %.4f, spread %.4f" % (r.upper, d))


def test_c05_lp_sum_combiner():
    rng = np.random.default_rng(5)
    b = SolverBudget(starts=2, iterations=15)
    bad = []
    for i in range(100):
        p = [1.0, 2.0, 3.0][i % 3]
        pick = lambda k: (S.lp(2, 2), S.lp(2, INF),
                          random_polygon(rng))[k]
        X, Y = pick(int(rng.integers(3))), pick(int(rng.integers(3)))
        spec = S.lp_sum(X, Y, p)
        z = S.project_to_sphere(spec, rng.standard_normal(4))
        x, y = z[:2], z[2:]
        alpha = float(rng.uniform(0.2, 2.0))
        n = int(rng.integers(1, 4))
        _, cx = dist_to_midpoint_hull(X, S.project_to_sphere(X, x), n, alpha,
                                      b)
        _, cy = dist_to_midpoint_hull(Y, S.project_to_sphere(Y, y), n, alpha,
                                      b)
        comb = combine_lp_sum(spec, x, y, cx, cy)
        combination_value(comb)
        U, V = comb.us, comb.vs
        if np.any(S.norm(spec, U) > 1 + 1e-9) or \
                np.any(S.norm(spec, V) > 1 + 1e-9):
            bad.append("instance %d membership" % i)
        if np.any(S.norm(spec, U - V) < alpha - 1e-9):
            bad.append("instance %d separation" % i)
        # recompute the error bound from scratch
        ex = S.norm(X, x / S.norm(X, x) - combination_value(cx))
        ey = S.norm(Y, y / S.norm(Y, y) - combination_value(cy))
        bound = (ex ** p + ey ** p) ** (1 / p)
        err = S.norm(spec, z - comb.weights @ (0.5 * (U + V)))
        if err > bound + 1e-9:
            bad.append("instance %d error %.3g > %.3g" % (i, err, bound))
        e2, b2 = lp_sum_errors(spec, x, y, cx, cy, comb)
        if abs(e2 - err) > 1e-12 or abs(b2 - bound) > 1e-12:
            bad.append("instance %d error report" % i)
    _finish(5, "lp-sum combiner", bad)


def test_c06_monotonicity_and_caratheodory():
    alphas = [1.0, 1.5, 2.0]
    bad = []
    worst = [0.0, 0.0, 0.0]
    for spec in space_zoo():
        b = SolverBudget(samples=8 if spec.polytopal else 4, starts=2,
                         iterations=30)
        d = spec.dim
        p = decay_profile(spec, alphas, d + 2, b, oracle=False)
        c = p.cleaned
        rise_n = float(np.max(np.diff(c, axis=1)))
        drop_a = float(np.max(-np.diff(c, axis=0)))
        stable = float(np.max(np.abs(c[:, d + 1:] - c[:, [d]])))
        worst = [max(worst[0], rise_n), max(worst[1], drop_a),
                 max(worst[2], stable)]
        if rise_n > 1e-3:
            bad.append("%s rises in n" % spec.label)
        if drop_a > 1e-3:
            bad.append("%s drops in alpha by %.3g" % (spec.label, drop_a))
        if stable > 2e-3:
            bad.append("%s moves past n=dim+1 by %.3g" % (spec.label, stable))
    _finish(6, "monotonicity and Caratheodory", bad,
            "worst n-rise %.1e, alpha-drop %.1e, tail %.1e" % tuple(worst))


def test_c07_verdicts():
    b = SolverBudget(samples=8, starts=3, resolution=512)
    bad = []
    evid = []
    for spec in (S.lp(2, 2, name="l2-2d"), S.lp(2, INF, name="linf-2d")):
        p = decay_profile(spec, [0.9, 1.0, 2.0], 3, b)
        v = uniform_verdict(p, 1e-2)
        evid.append("%s %s" % (spec.label, v.verdict))
        if v.verdict != CERTIFIED_FAILURE:
            bad.append("%s gave %s" % (spec.label, v.verdict))
        # a constant family X_k = X with level alpha - eps = 0.9
        rep = sequence_criterion([p] * 8, 1.0, 0.1, [1e-2, 0.5])
        if not agrees_with_verdict(rep, v, 1e-2):
            bad.append("%s family disagrees" % spec.label)
    _finish(7, "verdict engine", bad, ", ".join(evid))


def test_c08_lipschitz_trend():
    b = SolverBudget(samples=16, starts=2, iterations=30)
    vals = []
    lines = []
    for k in (1, 2, 3):
        spec = S.load(os.path.join(DATA, "lip-grid-%d.json" % k))
        n = spec.dim + 1
        c = cn_alpha(spec, n, 1.9, b, oracle=False).empirical_value
        vals.append(c)
        # reported only: smallest eps with C_n <= 4/n + eps
        lines.append("k=%d C=%.4f 4/n=%.4f eps*=%.4f"
                     % (k, c, 4 / n, max(0.0, c - 4 / n)))
    print("\n".join(lines))
    bad = ["not monotone: %s" % vals] if any(
        b2 > a + 5e-3 for a, b2 in zip(vals, vals[1:])) else []
    _finish(8, "Lipschitz trend", bad, " | ".join(lines))


def test_c09_sandbox_exactness():
    bad = []
    if dm(StepFunction.indicator(0, 0.25, 2, 2.0)) != 0.25:
        bad.append("indicator dm")
    for c in (0.1, 0.3, 0.75):
        if dm(StepFunction.constant(c)) != c:
            bad.append("constant %g" % c)
    rng = np.random.default_rng(9)
    viol = 0
    for _ in range(1000):
        fs = [random_step(rng) for _ in range(int(rng.integers(2, 5)))]
        viol += len(check_dm_calculus(fs, list(rng.random(3))).violations)
        f, g, h = (random_step(rng) for _ in range(3))
        viol += dm(f, h) > dm(f, g) + dm(g, h)
    if viol:
        bad.append("%d calculus violations" % viol)
    one = StepFunction.constant(1.0)
    for s in (0.5, 0.25, 0.125):
        for n in range(1, 9):
            r = spike_average_deficit(s, n)
            if abs(float(r.grid) - float(binomial_deficit_float(s, n))) > 1e-12:
                bad.append("deficit s=%g n=%d" % (s, n))
        if l1_norm(spike_family(s, 1)[0] - one) != 2 - 2 * s:
            bad.append("spike norm s=%g" % s)
    if not spike_average_deficit(0.25, 64).value < \
            spike_average_deficit(0.25, 4).value:
        bad.append("deficit does not shrink")
    _finish(9, "sandbox exactness", bad)


def _body(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read().split("\n", 1)[1]


def test_c10_reproducible_csv(tmp_path):
    cmds = {
        "decay": ["decay", "--space", os.path.join(DATA, "hexagon.json"),
                  "--alpha", "1,2", "--nmax", "3", "--samples", "8",
                  "--resolution", "128"],
        "cn-alpha": ["cn-alpha", "--space", os.path.join(DATA, "l2-2d.json"),
                     "--alpha", "1", "--n", "1..2", "--samples", "6",
                     "--no-oracle"],
        "sandbox-spikes": ["sandbox", "spikes", "--n", "1..4"],
    }
    bad = []
    for stem, argv in cmds.items():
        bodies = set()
        for w in (1, 4, 8):
            out = tmp_path / ("%s-%d" % (stem, w))
            code = cli.run(argv + ["--seed", "3", "--workers", str(w),
                                   "--out", str(out), "--quiet"])
            if code != 0:
                bad.append("%s exit %d" % (stem, code))
            bodies.add(_body(out / (stem + ".csv")))
        if len(bodies) != 1:
            bad.append("%s bodies differ" % stem)
    _finish(10, "reproducible CSV bodies", bad)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
