"""Midpoint sets S^alpha, their n-term hulls, C_n^alpha and the l_p-sum
combiner."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import hullsolve as HS
from . import spaces as S
from .budget import DEFAULT_BUDGET
from .errors import (DegenerateComponent, InvalidPoint, InvariantViolation,
                     LevelMismatch, UnsupportedSpace)
from .oracle import oracle_dist_2d
from .parallel import argbest, pmap

TOL = 1e-9
WEIGHT_TOL = 1e-12


@dataclass(eq=False)
class MidpointCombination:
    """sum_i weights[i] * (us[i] + vs[i]) / 2 with ||us[i] - vs[i]|| >= alpha."""

    space: S.SpaceSpec
    alpha: float
    weights: np.ndarray
    us: np.ndarray
    vs: np.ndarray

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, float))
        self.us = np.atleast_2d(np.asarray(self.us, float))
        self.vs = np.atleast_2d(np.asarray(self.vs, float))

    @property
    def terms(self):
        return list(zip(self.weights, self.us, self.vs))

    def __len__(self):
        return len(self.weights)

    def violations(self):
        out = []
        w = self.weights
        if len(w) == 0:
            return ["empty combination"]
        if not (self.us.shape == self.vs.shape == (len(w), self.space.dim)):
            return ["shape mismatch"]
        if abs(w.sum() - 1) > WEIGHT_TOL:
            out.append("weights sum to %.17g, not 1" % w.sum())
        if np.any(w < 0) or np.any(w > 1):
            out.append("weight outside [0, 1]")
        nu = S.norm(self.space, self.us)
        nv = S.norm(self.space, self.vs)
        sep = S.norm(self.space, self.us - self.vs)
        for i in np.nonzero(nu > 1 + TOL)[0]:
            out.append("||u_%d|| = %.12g > 1" % (i, nu[i]))
        for i in np.nonzero(nv > 1 + TOL)[0]:
            out.append("||v_%d|| = %.12g > 1" % (i, nv[i]))
        for i in np.nonzero(sep < self.alpha - TOL)[0]:
            out.append("||u_%d - v_%d|| = %.12g < alpha = %.12g"
                       % (i, i, sep[i], self.alpha))
        return out

    def to_dict(self):
        return {"alpha": self.alpha,
                "terms": [{"weight": float(l), "u": u.tolist(),
                           "v": v.tolist()} for l, u, v in self.terms]}


def combination_value(c):
    bad = c.violations()
    if bad:
        raise InvariantViolation("; ".join(bad))
    return c.weights @ (0.5 * (c.us + c.vs))


def _from_hull(space, alpha, hp):
    return MidpointCombination(space, alpha, hp.weights,
                               hp.centres + hp.halves,
                               hp.centres - hp.halves)


def dist_to_midpoint_hull(space, x, n, alpha, budget=DEFAULT_BUDGET,
                          rng=None):
    """Certified upper bound on d(x, S_n^alpha) and the combination attaining it."""
    x = np.asarray(x, float)
    if S.norm(space, x) > 1 + TOL:
        raise InvalidPoint("||x|| = %.12g > 1" % S.norm(space, x))
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 < alpha <= 2):
        raise ValueError("alpha must lie in (0, 2]")
    if rng is None:
        rng = HS.rng_for(budget.seed, 17, n)
    hp = HS.nearest(space, x, n, alpha, budget, rng)
    comb = _from_hull(space, alpha, hp)
    val = combination_value(comb)
    upper = float(S.norm(space, x - val))
    # the zero midpoint (any antipodal pair) caps every distance at ||x||
    if upper > S.norm(space, x):
        u = S.project_to_sphere(space, x if np.any(x) else
                                np.eye(space.dim)[0])
        comb = MidpointCombination(space, alpha, [1.0], [u], [-u])
        upper = float(S.norm(space, x))
    return upper, comb


@dataclass
class CnAlphaEstimate:
    space_id: str
    n: int
    alpha: float
    empirical_value: float
    certified_lower: Optional[float]
    witness_point: np.ndarray
    witness_combination: MidpointCombination
    budget: dict
    oracle_upper: Optional[float] = None
    oracle_term: Optional[float] = None
    values: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {"space_id": self.space_id, "n": self.n, "alpha": self.alpha,
                "empirical_value": self.empirical_value,
                "certified_lower": self.certified_lower,
                "oracle_upper": self.oracle_upper,
                "oracle_term": self.oracle_term,
                "witness_point": np.asarray(self.witness_point).tolist(),
                "witness_combination": self.witness_combination.to_dict(),
                "budget": self.budget}


def oracle_applies(space):
    return space.dim == 2


def cn_alpha(space, n, alpha, budget=DEFAULT_BUDGET, oracle=True):
    """Empirical C_n^alpha: max over a deterministic sphere sample."""
    if n < 1 or not (0 < alpha <= 2):
        raise ValueError("need n >= 1 and 0 < alpha <= 2")
    pts = S.sphere_sample(space, budget.seed, budget.samples, budget.max_dim)

    def one(i):
        rng = HS.rng_for(budget.seed, 11, n, i)
        return dist_to_midpoint_hull(space, pts[i], n, alpha, budget, rng)

    res = pmap(one, range(len(pts)), budget.workers)
    vals = [r[0] for r in res]
    k = argbest(vals)
    lower = o_up = o_term = None
    if oracle and oracle_applies(space):
        br = oracle_dist_2d(space, pts[k], n, alpha, budget.resolution)
        lower, o_up, o_term = br.lower, br.upper, br.resolution_term
    rec = {"samples": budget.samples, "starts": budget.starts,
           "iterations": budget.iterations, "seed": budget.seed,
           "resolution": budget.resolution}
    return CnAlphaEstimate(space.label, n, alpha, float(vals[k]), lower,
                           pts[k], res[k][1], rec, o_up, o_term, vals)


# -- l_p sums ---------------------------------------------------------------

def _pnorm2(a, b, p):
    if math.isinf(p):
        return np.maximum(a, b)
    return (a ** p + b ** p) ** (1.0 / p)


def lp_sum_errors(spec, x, y, combX, combY, comb):
    """(err, bound): err = ||(x,y) - value(comb)||, bound from component errors."""
    X, Y = spec.left, spec.right
    nx, ny = S.norm(X, x), S.norm(Y, y)
    errX = S.norm(X, x / nx - combination_value(combX))
    errY = S.norm(Y, y / ny - combination_value(combY))
    val = combination_value(comb)
    err = S.norm(spec, np.concatenate([x, y]) - val)
    return float(err), float(_pnorm2(errX, errY, spec.p))


def combine_lp_sum(spec, x, y, combX, combY):
    """n*m-term combination in X (+)_p Y built from component combinations."""
    if spec.kind != "sum" or math.isinf(spec.p):
        raise UnsupportedSpace("combiner needs a finite-exponent sum space")
    if combX.alpha != combY.alpha:
        raise LevelMismatch("levels %r and %r differ"
                            % (combX.alpha, combY.alpha))
    x, y = np.asarray(x, float), np.asarray(y, float)
    if not np.any(x) or not np.any(y):
        raise DegenerateComponent("a component vanishes; perturb and retry")
    xy = np.concatenate([x, y])
    if abs(S.norm(spec, xy) - 1) > TOL:
        raise InvalidPoint("||(x, y)|| must be 1")
    for c in (combX, combY):
        bad = c.violations()
        if bad:
            raise InvariantViolation("; ".join(bad))
    nx, ny = S.norm(spec.left, x), S.norm(spec.right, y)
    alpha = combX.alpha
    W, U, V = [], [], []
    for l, u, v in combX.terms:
        for m, a, b in combY.terms:
            W.append(l * m)
            U.append(np.concatenate([nx * u, ny * a]))
            V.append(np.concatenate([nx * v, ny * b]))
    W = np.asarray(W)
    W = W / W.sum()
    comb = MidpointCombination(spec, alpha, W, U, V)
    bad = comb.violations()
    if bad:
        raise InvariantViolation("; ".join(bad))
    err, bound = lp_sum_errors(spec, x, y, combX, combY, comb)
    if err > bound + TOL:
        raise InvariantViolation("error %.12g exceeds bound %.12g"
                                 % (err, bound))
    return comb
