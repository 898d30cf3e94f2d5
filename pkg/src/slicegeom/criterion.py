"""Decay of C_n^alpha in n, the single-space verdict, and the family test
with a computable stand-in for ultrafilter largeness."""
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .budget import DEFAULT_BUDGET
from .errors import GridMismatch, MissingStabilizedColumn
from .midpoints import cn_alpha
from .parallel import pmap

THETA = 1e-2
DENSITY_CUT = 0.95

CERTIFIED_FAILURE = "certified_failure"
CONSISTENT = "consistent_with_uniform"
INCONCLUSIVE = "inconclusive"


@dataclass
class DecayProfile:
    space_id: str
    dim: int
    alphas: List[float]
    ns: List[int]
    estimates: list            # [alpha index][n index] -> CnAlphaEstimate
    raw: np.ndarray = field(init=False)
    cleaned: np.ndarray = field(init=False)
    lowers: np.ndarray = field(init=False)

    def __post_init__(self):
        self.raw = np.array([[e.empirical_value for e in row]
                             for row in self.estimates], float)
        # the true sequence is non-increasing in n
        self.cleaned = np.minimum.accumulate(self.raw, axis=1)
        self.lowers = np.array(
            [[np.nan if e.certified_lower is None else e.certified_lower
              for e in row] for row in self.estimates], float)

    def column(self, n):
        if n not in self.ns:
            return None
        return self.ns.index(n)

    def row(self, alpha, tol=1e-12):
        for i, a in enumerate(self.alphas):
            if abs(a - alpha) <= tol:
                return i
        return None

    def to_dict(self):
        return {"space": self.space_id, "dim": self.dim,
                "alphas": list(self.alphas), "ns": list(self.ns),
                "raw": self.raw.tolist(), "cleaned": self.cleaned.tolist(),
                "certified_lower": [[None if math.isnan(v) else v
                                     for v in r] for r in self.lowers]}


def decay_profile(space, alphas, nmax, budget=DEFAULT_BUDGET, oracle=True):
    alphas = [float(a) for a in alphas]
    if nmax < 2:
        raise ValueError("nmax must be >= 2")
    if any(not (0 < a <= 2) for a in alphas):
        raise ValueError("alphas must lie in (0, 2]")
    ns = list(range(1, nmax + 1))
    cells = [(a, n) for a in alphas for n in ns]
    inner = budget.with_(workers=1)
    ests = pmap(lambda c: cn_alpha(space, c[1], c[0], inner, oracle=oracle),
                cells, budget.workers)
    grid = [ests[i * len(ns):(i + 1) * len(ns)] for i in range(len(alphas))]
    return DecayProfile(space.label, space.dim, alphas, ns, grid)


@dataclass
class Verdict:
    verdict: str
    theta: float
    evidence: list

    def to_dict(self):
        return {"verdict": self.verdict, "theta": self.theta,
                "evidence": self.evidence}


def uniform_verdict(profile, theta=THETA):
    """Decide from the stabilised column n = dim + 1.

    In dimension d, conv_{d+1} is already the full convex hull, so that
    column is the limit in n. An oracle lower bound above theta there is a
    certified failure; all cleaned values below theta are consistent with
    uniform decay; anything else is inconclusive.
    """
    n_star = profile.dim + 1
    j = profile.column(n_star)
    if j is None:
        raise MissingStabilizedColumn("profile lacks n = %d" % n_star)
    evidence = []
    failed = False
    for i, a in enumerate(profile.alphas):
        low = profile.lowers[i, j]
        low = None if math.isnan(low) else float(low)
        val = float(profile.cleaned[i, j])
        cert = low is not None and low > theta
        failed |= cert
        evidence.append({"alpha": a, "n": n_star, "cleaned": val,
                         "certified_lower": low, "certifies_failure": cert})
    if failed:
        v = CERTIFIED_FAILURE
    elif all(e["cleaned"] < theta for e in evidence):
        v = CONSISTENT
    else:
        v = INCONCLUSIVE
    return Verdict(v, theta, evidence)


@dataclass(frozen=True)
class FilterSurrogate:
    """Finite stand-in for 'the index set belongs to the ultrafilter'.

    frechet  the set contains the last `tail_fraction` of the sampled
             indices (cofinite as far as the sample can tell)
    density  every prefix of length K/2 .. K has relative density >= cut

    Neither mode represents a free ultrafilter; both are shape checks.
    """

    mode: str = "frechet"
    tail_fraction: float = 0.5
    density_cut: float = DENSITY_CUT

    def __post_init__(self):
        if self.mode not in ("frechet", "density"):
            raise ValueError("unknown surrogate mode %r" % self.mode)

    def is_large(self, members, K):
        members = set(int(k) for k in members)
        if K <= 0:
            return False
        if self.mode == "frechet":
            start = K - max(1, math.ceil(self.tail_fraction * K))
            return all(k in members for k in range(start, K))
        hits = np.cumsum([1 if k in members else 0 for k in range(K)])
        lo = max(1, math.ceil(K / 2))
        return all(hits[m - 1] / m >= self.density_cut
                   for m in range(lo, K + 1))


@dataclass
class SequenceReport:
    surrogate: str
    alpha: float
    eps: float
    level: float
    table: list
    satisfied: bool
    members: dict

    def to_dict(self):
        return {"surrogate": self.surrogate, "alpha": self.alpha,
                "eps": self.eps, "level": self.level,
                "table": [{"delta": d, "n": n} for d, n in self.table],
                "hypothesis_satisfied": self.satisfied,
                "members": {str(k): v for k, v in self.members.items()}}


def sequence_criterion(profiles, alpha, eps, deltas,
                       surrogate=FilterSurrogate()):
    """For each delta, the least n with {k : C_n^{alpha-eps}(X_k) < delta}
    large for the surrogate."""
    if not profiles:
        raise GridMismatch("empty family")
    if not (0 < eps < alpha):
        raise ValueError("need 0 < eps < alpha")
    ns = profiles[0].ns
    level = alpha - eps
    rows = []
    for k, p in enumerate(profiles):
        if p.ns != ns:
            raise GridMismatch("profile %d has a different n grid" % k)
        i = p.row(level)
        if i is None:
            raise GridMismatch("profile %d lacks alpha - eps = %.12g"
                               % (k, level))
        rows.append(p.cleaned[i])
    vals = np.asarray(rows)          # (K, len(ns))
    K = len(profiles)
    table, members = [], {}
    for delta in deltas:
        found = None
        for j, n in enumerate(ns):
            idx = [k for k in range(K) if vals[k, j] < delta]
            if surrogate.is_large(idx, K):
                found = n
                members[float(delta)] = idx
                break
        table.append((float(delta), found))
    ok = all(n is not None for _, n in table)
    return SequenceReport(surrogate.mode, float(alpha), float(eps), level,
                          table, ok, members)


def agrees_with_verdict(report, verdict, theta=THETA):
    """Family test and single-space verdict point the same way at delta=theta.

    Deltas at or below theta that find no n mean 'no decay below theta',
    which is what a certified failure asserts.
    """
    small = [n for d, n in report.table if d <= theta]
    if verdict.verdict == CERTIFIED_FAILURE:
        return bool(small) and all(n is None for n in small)
    if verdict.verdict == CONSISTENT:
        return all(n is not None for n in small)
    return True
