"""Search over the midpoint set S^beta(X) and its n-term hulls.

Every midpoint is written as m with a half-difference h, where m +- h lie in
the ball and ||h|| = beta/2 exactly. Nothing is lost by fixing ||h||: if
m +- h' fit in the ball with ||h'|| > beta/2, so do m +- s h' for s <= 1.
For a fixed unit direction the admissible centres

    M(w) = (B - beta w / 2) ∩ (B + beta w / 2)

form a convex set containing 0. Hence, with directions frozen, distance and
support problems over conv(M(w_1) ∪ ... ∪ M(w_k)) are convex: linear
programs for polytopal balls. The only non-convex choice left is the set of
directions, which is searched by candidates plus local pattern moves.
Smooth balls use SLSQP on the joint problem instead.

Every returned configuration is passed through `repair`, which makes it
exactly feasible, so all reported distances are certified upper bounds.
"""
import threading
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import sparse
from scipy.optimize import linprog, minimize, minimize_scalar

from . import spaces as S

FEAS_TOL = 1e-12
_SLSQP_LOCK = threading.Lock()  # scipy's Fortran SLSQP keeps global state
_LP_OPTS = {"primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10}


@dataclass
class HullPoint:
    """sum_i weights[i] * centres[i]; each centre +- halves[i] is a ball pair."""

    value: float
    weights: np.ndarray
    centres: np.ndarray
    halves: np.ndarray

    @property
    def point(self):
        return self.weights @ self.centres


def rng_for(seed, *keys):
    return np.random.default_rng([int(seed)] + [int(k) for k in keys])


# -- feasibility ------------------------------------------------------------

def shrink_centre(spec, m, h):
    """Largest t in [0, 1] with t*m +- h in the ball; returns t*m."""
    def worst(t):
        return max(S._norm(spec, t * m + h), S._norm(spec, t * m - h))

    if worst(1.0) <= 1 + FEAS_TOL:
        return m
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if worst(mid) <= 1 + FEAS_TOL:
            lo = mid
        else:
            hi = mid
    return lo * m


def repair(spec, centres, dirs, beta, rng=None):
    """Rescale half-differences to norm beta/2, then pull centres inward."""
    dirs = np.array(dirs, float)
    for i in range(len(dirs)):
        if not np.any(dirs[i]):
            rng = rng or np.random.default_rng(0)
            dirs[i] = rng.standard_normal(spec.dim)
    halves = 0.5 * beta * S.project_to_sphere(spec, dirs)
    out = np.array([shrink_centre(spec, m, h)
                    for m, h in zip(np.asarray(centres, float), halves)])
    return out, halves


# -- candidate directions ---------------------------------------------------

def _canon(W):
    """Unit directions up to sign (w and -w give the same centre set)."""
    W = np.asarray(W, float)
    out = []
    for w in W:
        nz = np.nonzero(np.abs(w) > 1e-12)[0]
        if len(nz) == 0:
            continue
        out.append(w if w[nz[0]] > 0 else -w)
    return np.asarray(out)


@lru_cache(maxsize=64)
def direction_candidates(spec, seed, extra, max_dim=8):
    """Structured unit directions for polytopal balls.

    Vertices, facet centroids, edge midpoints (small polytopes only) and
    `extra` seeded random sphere points, deduplicated up to sign.
    """
    V = S.ball_vertices(spec, max_dim)
    parts = [V, S.facet_centroids(spec, max_dim)]
    if len(V) <= 32:
        act = (V @ spec.rows.T) >= 1 - 1e-9
        for i, j in combinations(range(len(V)), 2):
            if np.count_nonzero(act[i] & act[j]) >= spec.dim - 1 and \
                    np.max(np.abs(V[i] + V[j])) > 1e-9:
                parts.append(((V[i] + V[j]) / 2)[None])
    rng = rng_for(seed, 9001)
    parts.append(rng.standard_normal((extra, spec.dim)))
    W = S.project_to_sphere(spec, _canon(np.vstack(parts)))
    from .polytope import dedup
    W = dedup(W, 1e-9)
    W.setflags(write=False)
    return W


# -- linear programs --------------------------------------------------------

def _hull_lp(A, H, x=None, g=None):
    """LP over conv(∪_k M_k) where M_k = {m : A(m +- H[k]) <= 1}.

    With `x`: minimise the polytopal norm of x - point. With `g`: maximise
    <g, point>. Returns (objective, weights, z) where z[k] = weights[k] * m_k.
    """
    K, d = H.shape
    R = len(A)
    AH = A @ H.T  # (R, K)
    off = 1 if x is not None else 0
    top = R if x is not None else 0
    nv = off + K + K * d
    kk, rr = np.meshgrid(np.arange(K), np.arange(R), indexing="ij")
    kk, rr = kk.ravel(), rr.ravel()  # block row (k, r) -> k * R + r
    rows, cols, vals = [], [], []
    zc = off + K + kk[:, None] * d + np.arange(d)[None, :]
    for s, sgn in enumerate((1.0, -1.0)):
        base = top + s * K * R + kk * R + rr
        rows += [base, np.repeat(base, d)]
        cols += [off + kk, zc.ravel()]
        vals += [sgn * AH[rr, kk] - 1.0, A[rr].ravel()]
    b_ub = np.zeros(top + 2 * K * R)
    if x is not None:
        r0 = np.arange(R)
        rows += [r0, np.repeat(np.tile(r0, K), d)]
        cols += [np.zeros(R, int),
                 (off + K + np.repeat(np.arange(K), R)[:, None] * d
                  + np.arange(d)[None, :]).ravel()]
        vals += [-np.ones(R), -np.tile(A, (K, 1)).ravel()]
        b_ub[:R] = -(A @ x)
    A_ub = sparse.csc_matrix((np.concatenate(vals),
                              (np.concatenate(rows), np.concatenate(cols))),
                             shape=(len(b_ub), nv))
    nv = off + K + K * d
    A_eq = np.zeros((1, nv))
    A_eq[0, off:off + K] = 1.0
    c = np.zeros(nv)
    if x is not None:
        c[0] = 1.0
    else:
        c[off + K:] = -np.tile(g, K)
    bounds = [(0, None)] * (off + K) + [(None, None)] * (K * d)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=bounds, method="highs", options=_LP_OPTS)
    if res.status != 0:
        raise RuntimeError("hull LP failed: %s" % res.message)
    lam = res.x[off:off + K]
    Z = res.x[off + K:].reshape(K, d)
    obj = res.fun if x is not None else -res.fun
    return float(obj), lam, Z


def lp_weights(A, x, M):
    """Best simplex weights for fixed centres under the polytopal norm."""
    K = len(M)
    R = len(A)
    AM = A @ M.T  # (R, K)
    c = np.zeros(1 + K)
    c[0] = 1.0
    A_ub = np.hstack([-np.ones((R, 1)), -AM])
    A_eq = np.zeros((1, 1 + K))
    A_eq[0, 1:] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=-(A @ x), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (1 + K), method="highs",
                  options=_LP_OPTS)
    lam = np.clip(res.x[1:], 0, None)
    return lam / lam.sum()


def fw_weights(spec, x, M, lam=None, iters=500, gap_tol=1e-8):
    """Conditional gradient on the simplex for min ||x - lam @ M||."""
    K = len(M)
    lam = np.full(K, 1.0 / K) if lam is None else np.clip(lam, 0, None)
    lam = lam / lam.sum() if lam.sum() > 0 else np.full(K, 1.0 / K)

    def f(l):
        return S._norm(spec, x - l @ M)

    for _ in range(iters):
        r = x - lam @ M
        cur = S._norm(spec, r)
        if cur == 0:
            break
        g = S.norm_grad(spec, r)
        grad = -(M @ g)
        k = int(np.argmin(grad))
        if grad @ lam - grad[k] <= gap_tol:
            break
        e = np.zeros(K)
        e[k] = 1.0
        res = minimize_scalar(lambda t: f((1 - t) * lam + t * e),
                              bounds=(0.0, 1.0), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun >= cur:
            break
        lam = (1 - res.x) * lam + res.x * e
    return lam


def caratheodory(points, weights, target):
    """Rewrite a convex combination with at most `target` >= d+1 points."""
    P = np.asarray(points, float)
    lam = np.asarray(weights, float).copy()
    idx = np.arange(len(P))
    while len(idx) > target:
        Q = np.vstack([P[idx].T, np.ones(len(idx))])
        mu = np.linalg.svd(Q)[2][-1]
        if not np.any(mu > 1e-14):
            mu = -mu
        pos = mu > 1e-14
        ratio = np.full(len(idx), np.inf)
        ratio[pos] = lam[idx][pos] / mu[pos]
        j = int(np.argmin(ratio))
        lam[idx] = lam[idx] - ratio[j] * mu
        lam[idx[j]] = 0.0
        lam = np.clip(lam, 0, None)
        idx = idx[lam[idx] > 1e-15]
    w = lam[idx]
    return idx, w / w.sum()


# -- polytopal backend ------------------------------------------------------

def _finish_polytopal(spec, x, M, dirs, beta):
    M, H = repair(spec, M, dirs, beta)
    lam = lp_weights(spec.rows, x, M)
    keep = lam > 0
    if not keep.any():
        keep[:] = True
    M, H, lam = M[keep], H[keep], lam[keep] / lam[keep].sum()
    val = S._norm(spec, x - lam @ M)
    return HullPoint(float(val), lam, M, H)


def _pattern_refine(score, W, rng, iterations, spec, sigma=0.25):
    """Greedy perturbation search over the unit directions in W."""
    W = np.array(W, float)
    best = score(W)
    n = len(W)
    it = 0
    fails = 0
    while it < iterations and sigma > 1e-6 and best > 1e-12:
        i = it % n
        xi = rng.standard_normal(spec.dim)
        improved = False
        for sgn in (1.0, -1.0):
            cand = W.copy()
            trial = cand[i] + sgn * sigma * xi
            if not np.any(trial):
                continue
            cand[i] = S.project_to_sphere(spec, trial)
            val = score(cand)
            if val < best - 1e-13:
                W, best, improved = cand, val, True
                break
        it += 1
        fails = 0 if improved else fails + 1
        if fails >= n:
            sigma *= 0.5
            fails = 0
    return W, best


def nearest_polytopal(spec, x, n, beta, budget, rng):
    A = spec.rows
    d = spec.dim
    W = direction_candidates(spec, budget.seed, budget.directions,
                             budget.max_dim)
    if np.any(x):
        W = np.vstack([W, S.project_to_sphere(spec, x)[None]])
    H = 0.5 * beta * W
    _, lam, Z = _hull_lp(A, H, x=x)
    act = np.nonzero(lam > 1e-12)[0]
    if len(act) <= n or n >= d + 1:
        M = Z[act] / lam[act, None]
        sel, w = caratheodory(M, lam[act], max(n, 1) if len(act) <= n
                              else d + 1)
        return _finish_polytopal(spec, x, M[sel], W[act][sel], beta)

    def dist(Wsub):
        return _hull_lp(A, 0.5 * beta * Wsub, x=x)[0]

    pool = list(act[np.argsort(-lam[act])][:2 * n + 2])
    if len(W) <= 40:
        singles = [dist(W[k:k + 1]) for k in range(len(W))]
        for k in np.argsort(singles)[:4]:
            if k not in pool:
                pool.append(int(k))
    pool = pool[:8]
    best, best_sub = np.inf, None
    for sub in combinations(pool, n):
        val = dist(W[list(sub)])
        if val < best - 1e-13:
            best, best_sub = val, sub
    Wb, _ = _pattern_refine(dist, W[list(best_sub)], rng, budget.iterations,
                            spec)
    _, lam, Z = _hull_lp(A, 0.5 * beta * Wb, x=x)
    lam_safe = np.where(lam > 1e-15, lam, 1.0)
    M = np.where(lam[:, None] > 1e-15, Z / lam_safe[:, None], 0.0)
    return _finish_polytopal(spec, x, M, Wb, beta)


def support_polytopal(spec, g, beta, budget, rng):
    A = spec.rows
    W = direction_candidates(spec, budget.seed, budget.directions,
                             budget.max_dim)
    _, lam, Z = _hull_lp(A, 0.5 * beta * W, g=g)
    act = np.nonzero(lam > 1e-12)[0]
    vals = [(g @ Z[k]) / lam[k] for k in act]
    k = int(act[int(np.argmax(vals))])

    def neg(Wsub):
        return -_hull_lp(A, 0.5 * beta * Wsub, g=g)[0]

    Wb, _ = _pattern_refine(neg, W[k:k + 1], rng, budget.iterations, spec)
    _, lam, Z = _hull_lp(A, 0.5 * beta * Wb, g=g)
    M, H = repair(spec, Z / lam[:, None], Wb, beta)
    return float(g @ M[0]), M[0], H[0]


# -- smooth backend ---------------------------------------------------------

def support_point(spec, g):
    """A maximiser of <g, x> over the unit ball."""
    g = np.asarray(g, float)
    if not np.any(g):
        return np.zeros_like(g)
    if spec.polytopal:
        V = S.ball_vertices(spec, max(8, spec.dim))
        return V[int(np.argmax(V @ g))].copy()
    if spec.kind == "lp":
        q = S._conj(spec.p)
        y = np.sign(g) * np.abs(g) ** (q - 1)
        return S.project_to_sphere(spec, y)
    if spec.kind == "sum":
        d1 = spec.left.dim
        a, b = g[:d1], g[d1:]
        xa, xb = support_point(spec.left, a), support_point(spec.right, b)
        t = support_point(S.lp(2, spec.p),
                          np.array([S.support_value(spec.left, a),
                                    S.support_value(spec.right, b)]))
        return np.concatenate([t[0] * xa, t[1] * xb])
    raise ValueError(spec.kind)


def _grads(spec, X):
    """Rows: norming functionals of the rows of X (vectorised for l_p)."""
    X = np.atleast_2d(X)
    if spec.kind == "lp" and 1 < spec.p < np.inf:
        n = S._norm(spec, X)
        safe = np.where(n > 0, n, 1.0)[:, None]
        return np.sign(X) * (np.abs(X) / safe) ** (spec.p - 1)
    return np.array([S.norm_grad(spec, r) for r in X])


def _sq_and_grad(spec, X):
    """||row||^2 and its gradient 2 ||row|| g(row), row-wise."""
    n = S._norm(spec, X)
    return n ** 2, 2 * n[:, None] * _grads(spec, X)


def _slsqp(fun, z0, cons, bounds, maxiter=100, jac=None):
    with _SLSQP_LOCK:
        return minimize(fun, z0, jac=jac, method="SLSQP", constraints=cons,
                        bounds=bounds,
                        options={"maxiter": maxiter, "ftol": 1e-11})


def _random_unit(spec, rng, k):
    return S.project_to_sphere(spec, rng.standard_normal((k, spec.dim)))


def nearest_smooth(spec, x, n, beta, budget, rng):
    d = spec.dim
    hb = 0.5 * beta

    def unpack(z):
        return (z[:n], z[n:n + n * d].reshape(n, d),
                z[n + n * d:].reshape(n, d))

    nM = n * d

    def obj(z):
        lam, M, Hh = unpack(z)
        return S._norm(spec, x - lam @ M) ** 2

    def obj_jac(z):
        lam, M, Hh = unpack(z)
        r = x - lam @ M
        v, G = _sq_and_grad(spec, r[None])
        out = np.zeros_like(z)
        out[:n] = -(M @ G[0])
        out[n:n + nM] = -(lam[:, None] * G[0][None]).ravel()
        return out

    def ineq(z):
        lam, M, Hh = unpack(z)
        return np.concatenate([1 - S._norm(spec, M + Hh) ** 2,
                               1 - S._norm(spec, M - Hh) ** 2,
                               S._norm(spec, Hh) ** 2 - hb ** 2])

    def ineq_jac(z):
        lam, M, Hh = unpack(z)
        J = np.zeros((3 * n, len(z)))
        _, Gp = _sq_and_grad(spec, M + Hh)
        _, Gm = _sq_and_grad(spec, M - Hh)
        _, Gh = _sq_and_grad(spec, Hh)
        for k in range(n):
            mc = slice(n + k * d, n + (k + 1) * d)
            hc = slice(n + nM + k * d, n + nM + (k + 1) * d)
            J[k, mc] = -Gp[k]
            J[k, hc] = -Gp[k]
            J[n + k, mc] = -Gm[k]
            J[n + k, hc] = Gm[k]
            J[2 * n + k, hc] = Gh[k]
        return J

    eq_jac = np.zeros(n + 2 * nM)
    eq_jac[:n] = 1.0
    cons = [{"type": "ineq", "fun": ineq, "jac": ineq_jac},
            {"type": "eq", "fun": lambda z: np.sum(z[:n]) - 1.0,
             "jac": lambda z: eq_jac}]
    bounds = [(0.0, 1.0)] * n + [(-2.0, 2.0)] * (2 * n * d)

    starts = []
    for s in range(max(1, budget.starts)):
        Hd = _random_unit(spec, rng, n)
        if s == 0:
            M = np.tile((1 - hb) * x, (n, 1))
            lam = np.full(n, 1.0 / n)
        else:
            M = rng.uniform(0, 1, (n, 1)) * x + 0.3 * rng.standard_normal(
                (n, d))
            lam = rng.dirichlet(np.ones(n))
        M, Hh = repair(spec, M, Hd, beta, rng)
        starts.append((lam, M, Hh))

    best = None
    for lam, M, Hh in starts:
        z0 = np.concatenate([lam, M.ravel(), Hh.ravel()])
        res = _slsqp(obj, z0, cons, bounds, jac=obj_jac)
        cands = [z0, res.x] if np.all(np.isfinite(res.x)) else [z0]
        for z in cands:
            l2, M2, H2 = unpack(z)
            M2, H2 = repair(spec, M2, H2, beta, rng)
            l2 = fw_weights(spec, x, M2, l2)
            val = float(S._norm(spec, x - l2 @ M2))
            if best is None or val < best.value - 1e-15:
                best = HullPoint(val, l2, M2, H2)
    return best


def support_smooth(spec, g, beta, budget, rng):
    d = spec.dim
    hb = 0.5 * beta
    xg = support_point(spec, g)

    gj = np.concatenate([-g, np.zeros(d)])

    def obj(z):
        return -(g @ z[:d])

    def ineq(z):
        m, h = z[:d], z[d:]
        return np.array([1 - S._norm(spec, m + h) ** 2,
                         1 - S._norm(spec, m - h) ** 2,
                         S._norm(spec, h) ** 2 - hb ** 2])

    def ineq_jac(z):
        m, h = z[:d], z[d:]
        _, G = _sq_and_grad(spec, np.vstack([m + h, m - h, h]))
        return np.array([np.concatenate([-G[0], -G[0]]),
                         np.concatenate([-G[1], G[1]]),
                         np.concatenate([np.zeros(d), G[2]])])

    cons = [{"type": "ineq", "fun": ineq, "jac": ineq_jac}]
    best = None
    for s in range(max(1, budget.starts)):
        h0 = _random_unit(spec, rng, 1)[0]
        m0 = (1 - hb) * xg if s == 0 else \
            rng.uniform(0, 1) * xg + 0.2 * rng.standard_normal(d)
        M, Hh = repair(spec, m0[None], h0[None], beta, rng)
        z0 = np.concatenate([M[0], Hh[0]])
        res = _slsqp(obj, z0, cons, [(-2.0, 2.0)] * (2 * d),
                     jac=lambda z: gj)
        for z in (z0, res.x):
            if not np.all(np.isfinite(z)):
                continue
            M2, H2 = repair(spec, z[None, :d], z[None, d:], beta, rng)
            val = float(g @ M2[0])
            if best is None or val > best[0] + 1e-15:
                best = (val, M2[0], H2[0])
    return best


# -- dispatch ---------------------------------------------------------------

def nearest(spec, x, n, beta, budget, rng):
    """Certified upper bound on d(x, S_n^beta) with its configuration."""
    if spec.polytopal and spec.dim <= budget.max_dim:
        return nearest_polytopal(spec, x, n, beta, budget, rng)
    return nearest_smooth(spec, x, n, beta, budget, rng)


def support(spec, g, beta, budget, rng):
    """Lower bound on sup{<g, m> : m in S^beta}: (value, centre, half)."""
    if spec.polytopal and spec.dim <= budget.max_dim:
        return support_polytopal(spec, g, beta, budget, rng)
    return support_smooth(spec, g, beta, budget, rng)
