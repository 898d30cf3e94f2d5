"""Slices of unit balls: diameters, small-slice search and the two witness
constructions linking slice diameters to the midpoint set S^beta."""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize

from . import hullsolve as HS
from . import spaces as S
from .budget import DEFAULT_BUDGET
from .errors import (DepthOutOfRange, DimensionBudgetExceeded, EmptySlice,
                     InvalidPoint, NotFound, NotSeparated, ZeroFunctional)
from .parallel import pmap
from .polytope import halfspace_vertices

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Slice:
    space: S.SpaceSpec
    functional: np.ndarray
    depth: float

    def level(self):
        return 1.0 - self.depth

    def contains(self, x, closed=True, tol=TOL):
        x = np.asarray(x, float)
        if S.norm(self.space, x) > 1 + tol:
            return False
        v = float(self.functional @ x)
        if closed:
            return v >= self.level() - tol
        return v > self.level()


@dataclass
class DiameterResult:
    lower: float
    upper: float
    certified: bool
    witness: tuple
    heuristic: bool = False

    @property
    def value(self):
        return self.upper


@dataclass
class MinSliceResult:
    lower: float
    upper: float
    lower_certified: bool
    upper_certified: bool
    functional: np.ndarray
    witness: tuple
    evaluated: int = 0


@dataclass
class Separation:
    slice: Slice
    hull_point: np.ndarray
    gap: float
    support_value: float
    threshold: float
    atoms: list = field(default_factory=list)


def make_slice(space, f, depth):
    f = np.asarray(f, float)
    if f.shape != (space.dim,):
        raise S.DimensionMismatch("functional has shape %s" % (f.shape,))
    if not (0 < depth <= 2):
        raise DepthOutOfRange("depth must lie in (0, 2], got %r" % depth)
    dn = S.dual_norm(space, f)
    if dn <= 0:
        raise ZeroFunctional("zero functional defines no slice")
    g = f / dn
    g.setflags(write=False)
    return Slice(space, g, float(depth))


# -- diameters --------------------------------------------------------------

def slice_vertices(sl, max_dim=8):
    space = sl.space
    if space.dim > max_dim:
        raise DimensionBudgetExceeded("dim %d > budget %d"
                                      % (space.dim, max_dim))
    A = space.rows
    A2 = np.vstack([A, -sl.functional[None]])
    b2 = np.concatenate([np.ones(len(A)), [-(1.0 - sl.depth)]])
    V = halfspace_vertices(A2, b2)
    if V is None or len(V) == 0:
        raise EmptySlice("closed slice has empty interior (numerical failure)")
    return V


def _max_pair(space, V):
    best, pair = -1.0, (V[0], V[0])
    for i in range(len(V)):
        d = S.norm(space, V[i] - V[i + 1:]) if i + 1 < len(V) else []
        if len(d):
            j = int(np.argmax(d))
            if d[j] > best:
                best, pair = float(d[j]), (V[i].copy(), V[i + 1 + j].copy())
    return max(best, 0.0), pair


def _into_slice(sl, x, anchor):
    """Pull x into the closed slice along the segment towards `anchor`."""
    space = sl.space
    n = S.norm(space, x)
    if n > 1:
        x = x / n
    lvl = sl.level()
    fx = float(sl.functional @ x)
    if fx < lvl:
        fa = float(sl.functional @ anchor)
        t = (lvl - fx) / (fa - fx)
        x = (1 - t) * x + t * anchor
        # anchor is on the sphere with f = 1; nudge against round-off
        while sl.functional @ x < lvl:
            x = 0.999999999999 * x + 1e-12 * anchor
    return x


def _smooth_diameter(sl, budget):
    space, f, d = sl.space, sl.functional, sl.space.dim
    xf = HS.support_point(space, f)
    lvl = sl.level()
    rng = HS.rng_for(budget.seed, 31)

    def obj(z):
        return -S._norm(space, z[:d] - z[d:]) ** 2

    def ineq(z):
        u, v = z[:d], z[d:]
        return np.array([1 - S._norm(space, u) ** 2,
                         1 - S._norm(space, v) ** 2,
                         f @ u - lvl, f @ v - lvl])

    best = (0.0, (xf.copy(), xf.copy()))
    for s in range(max(1, budget.starts)):
        if s == 0:
            # tangent chord through the level set
            t = rng.standard_normal(d)
            t -= (t @ f) / (f @ f) * f
            if not np.any(t):
                t = rng.standard_normal(d)
            base = lvl * xf
            u0, v0 = base + 0.5 * t, base - 0.5 * t
        else:
            u0 = xf + 0.5 * rng.standard_normal(d)
            v0 = xf + 0.5 * rng.standard_normal(d)
        u0, v0 = _into_slice(sl, u0, xf), _into_slice(sl, v0, xf)
        res = HS._slsqp(obj, np.concatenate([u0, v0]),
                        [{"type": "ineq", "fun": ineq}],
                        [(-2.0, 2.0)] * (2 * d), maxiter=300)
        for z in (np.concatenate([u0, v0]), res.x):
            if not np.all(np.isfinite(z)):
                continue
            u, v = _into_slice(sl, z[:d], xf), _into_slice(sl, z[d:], xf)
            val = float(S.norm(space, u - v))
            if val > best[0] + 1e-15:
                best = (val, (u, v))
    return best


def slice_diameter(sl, budget=DEFAULT_BUDGET):
    """Diameter of the closed slice.

    Polytopal balls: exact, as the maximum over vertex pairs of the slice
    polytope. Smooth balls: a multi-start lower bound, flagged heuristic.
    """
    space = sl.space
    if space.polytopal:
        V = slice_vertices(sl, budget.max_dim)
        val, pair = _max_pair(space, V)
        return DiameterResult(val, val, True, pair)
    val, pair = _smooth_diameter(sl, budget)
    return DiameterResult(val, val, False, pair, heuristic=True)


# -- smallest slices --------------------------------------------------------

def _candidate_functionals(space, budget):
    d = space.dim
    cands = []
    if space.polytopal and d <= budget.max_dim:
        A = space.rows
        V = S.ball_vertices(space, budget.max_dim)
        act = (V @ A.T) >= 1 - 1e-9
        for i in range(len(V)):
            cands.append(A[act[i]].mean(axis=0))
        cands.extend(A)
    rng = HS.rng_for(budget.seed, 41)
    cands.extend(rng.standard_normal((max(4, 2 * budget.starts), d)))
    return [c for c in cands if np.any(c)]


def _diam_of(space, depth, budget):
    def f(g):
        if not np.any(g):
            return 2.0, None
        r = slice_diameter(make_slice(space, g, depth), budget)
        return r.upper, r
    return f


def min_slice_diameter(space, depth, budget=DEFAULT_BUDGET):
    if not (0 < depth <= 2):
        raise DepthOutOfRange("depth must lie in (0, 2], got %r" % depth)
    d = space.dim
    exact = space.polytopal and d <= budget.max_dim
    if depth == 2:
        # the closed slice is the whole ball
        g = np.zeros(d)
        g[0] = 1.0
        sl = make_slice(space, g, 2.0)
        r = slice_diameter(sl, budget)
        return MinSliceResult(2.0, 2.0, True, True, sl.functional,
                              r.witness, 1)
    fn = _diam_of(space, depth, budget)
    cands = _candidate_functionals(space, budget)
    evals = pmap(fn, cands, budget.workers)
    vals = [e[0] for e in evals]
    order = np.argsort(vals, kind="stable")
    best_g = cands[order[0]]
    best_v, best_r = evals[order[0]]
    count = len(cands)

    # local refinement of the few best functionals
    for k in order[:3 if exact else 1]:
        g0 = cands[k] / S.dual_norm(space, cands[k])
        res = minimize(lambda g: fn(g)[0], g0, method="Nelder-Mead",
                       options={"maxiter": budget.iterations * (d if exact
                                                               else 1),
                                "xatol": 1e-7, "fatol": 1e-10})
        count += res.nfev
        if np.any(res.x):
            v, r = fn(res.x)
            if v < best_v - 1e-13:
                best_v, best_r, best_g = v, r, res.x

    lower, lower_cert = best_v, False
    if exact and d == 2:
        m = budget.angular
        th = 2 * np.pi * np.arange(m) / m
        grid = [np.array([np.cos(t), np.sin(t)]) for t in th]
        gev = pmap(fn, grid, budget.workers)
        gv = np.array([e[0] for e in gev])
        count += m
        j = int(np.argmin(gv))
        if gv[j] < best_v - 1e-13:
            best_v, best_r, best_g = gv[j], gev[j][1], grid[j]
        # arc-wise bound: each grid arc may dip by at most its own jump
        nxt = np.roll(gv, -1)
        arc = np.minimum(gv, nxt) - np.abs(nxt - gv)
        lower = max(0.0, min(float(arc.min()), best_v))
        lower_cert = True
    g = best_g / S.dual_norm(space, best_g)
    return MinSliceResult(float(lower), float(best_v), lower_cert, exact, g,
                          best_r.witness, count)


# -- witnesses --------------------------------------------------------------

def _proj_coeffs(P, x):
    """Euclidean nearest point of conv(rows of P) to x (small active QP)."""
    k = len(P)
    G = P @ P.T
    c = P @ x

    def obj(w):
        return 0.5 * w @ G @ w - c @ w

    res = minimize(obj, np.full(k, 1.0 / k), jac=lambda w: G @ w - c,
                   method="SLSQP", bounds=[(0, 1)] * k,
                   constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1,
                                 "jac": lambda w: np.ones(k)}],
                   options={"ftol": 1e-15, "maxiter": 500})
    w = np.clip(res.x, 0, None)
    return w / w.sum()


def separating_slice(space, x0, alpha, eps, budget=DEFAULT_BUDGET,
                     rounds=None):
    """Slice containing x0 that misses S^{alpha-eps}, found by projection.

    The Euclidean projection p of x0 onto the hull of midpoints produced by
    the support oracle is tracked with a Gilbert-style active set. When the
    hyperplane through the midpoint of x0 and the hull support clears x0 by
    at least budget.margin (Euclidean), the open side containing x0 is
    returned as a slice. Raises NotSeparated otherwise.
    """
    x0 = np.asarray(x0, float)
    if S.norm(space, x0) > 1 + TOL:
        raise InvalidPoint("||x0|| > 1")
    if not (0 < eps < alpha <= 2):
        raise ValueError("need 0 < eps < alpha <= 2")
    beta = alpha - eps
    if not np.any(x0):
        raise NotSeparated("0 lies in every midpoint set")
    rounds = rounds or max(20, budget.iterations)
    atoms = [np.zeros(space.dim)]
    p = np.zeros(space.dim)
    s_val = 0.0
    for it in range(rounds):
        g = x0 - p
        if np.linalg.norm(g) < budget.margin:
            break
        rng = HS.rng_for(budget.seed, 51, it)
        s_val, m, _ = HS.support(space, g, beta, budget, rng)
        if s_val - g @ p <= 1e-12 * max(1.0, np.linalg.norm(g)):
            break
        atoms.append(m)
        P = np.asarray(atoms)
        w = _proj_coeffs(P, x0)
        keep = w > 1e-12
        atoms = [a for a, k in zip(atoms, keep) if k]
        p = w[keep] @ P[keep]
    g = x0 - p
    gn = np.linalg.norm(g)
    if gn < budget.margin:
        raise NotSeparated("x0 within %.3g of the sampled hull" % gn)
    # final support with a fresh, larger search
    rng = HS.rng_for(budget.seed, 52)
    big = budget.with_(starts=2 * budget.starts)
    s_val, m, _ = HS.support(space, g, beta, big, rng)
    s_val = max(s_val, max(float(g @ a) for a in atoms))
    gx = float(g @ x0)
    gap = (gx - s_val) / gn
    if gap < budget.margin:
        raise NotSeparated("separation gap %.3g below margin %.3g"
                           % (gap, budget.margin))
    thr = 0.5 * (gx + s_val)
    dn = S.dual_norm(space, g)
    sl = make_slice(space, g, (dn - thr) / dn)
    return Separation(sl, p, float(gap), float(s_val), float(thr),
                      [np.asarray(a) for a in atoms])


def _stretch(space, m, h):
    """Scale h up as far as m +- s h stays in the ball (s >= 1)."""
    def ok(s):
        return max(S.norm(space, m + s * h), S.norm(space, m - s * h)) \
            <= 1 + 1e-15

    hi = 1.0 / max(S.norm(space, h), 1e-300)
    if ok(hi):
        return hi * h
    lo = 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo * h


def _widen_polytopal(space, f, level, w):
    """max t with m +- t w in the ball and <f, m> >= level (an LP)."""
    A = space.rows
    d = space.dim
    aw = A @ w
    A_ub = np.vstack([np.hstack([A, aw[:, None]]),
                      np.hstack([A, -aw[:, None]]),
                      np.concatenate([-f, [0.0]])[None]])
    b_ub = np.concatenate([np.ones(2 * len(A)), [-level]])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub,
                  bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status != 0:
        return None
    return res.x[:d], res.x[-1] * w


def slice_spread_witness(sl, alpha, eps, budget=DEFAULT_BUDGET):
    """Pair (u, v) in the slice with ||u - v|| >= alpha - eps, or NotFound.

    A midpoint m of S^{alpha-eps} with f(m) > 1 - depth/2 forces both
    generators into the slice, since f(u), f(v) <= 1 and they average f(m).
    """
    if not (0 < eps < alpha <= 2):
        raise ValueError("need 0 < eps < alpha <= 2")
    beta = alpha - eps
    space = sl.space
    rng = HS.rng_for(budget.seed, 61)
    val, m, h = HS.support(space, sl.functional, beta, budget, rng)
    if val <= 1 - sl.depth / 2:
        raise NotFound("no midpoint of S^%.6g reached the half-depth slice"
                       % beta)
    h = _stretch(space, m, h)
    if space.polytopal:
        # same direction, wider pair, midpoint kept in the half-depth slice
        out = _widen_polytopal(space, sl.functional, min(val, 1.0),
                               h / S.norm(space, h))
        if out is not None:
            m2, h2 = out
            m2, h2 = m2, _stretch(space, m2, h2) if np.any(h2) else h2
            if S.norm(space, 2 * h2) > S.norm(space, 2 * h) and \
                    sl.functional @ m2 > 1 - sl.depth / 2:
                m, h = m2, h2
    u, v = m + h, m - h
    if not (sl.contains(u) and sl.contains(v)
            and S.norm(space, u - v) >= beta - TOL):
        raise NotFound("witness failed verification")
    return u, v
