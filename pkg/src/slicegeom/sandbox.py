"""Dyadic step functions on finite product cubes, the convergence-in-measure
metric d_m, and the spike family with its exact averaging oracle."""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (GridIncompatible, GridTooLarge, InvariantViolation,
                     NonDyadicSupport)

MAX_CELLS = 2 ** 24
MAX_GRID_N = 12


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Function on [0,1]^coords, constant on dyadic cells.

    Coordinate j is split into 2**resolutions[j] intervals; `values` has
    that shape. A resolution of 0 means the function ignores the coordinate.
    """

    resolutions: tuple
    values: np.ndarray

    def __post_init__(self):
        res = tuple(int(r) for r in self.resolutions)
        vals = np.asarray(self.values, float)
        if not res or any(r < 0 for r in res):
            raise GridIncompatible("need at least one coordinate, r >= 0")
        if vals.shape != tuple(2 ** r for r in res):
            raise GridIncompatible("values shape %s does not match %s"
                                   % (vals.shape, res))
        vals.setflags(write=False)
        object.__setattr__(self, "resolutions", res)
        object.__setattr__(self, "values", vals)

    @property
    def coords(self):
        return len(self.resolutions)

    @property
    def cell_exponent(self):
        return sum(self.resolutions)

    @classmethod
    def constant(cls, c, coords=1):
        return cls((0,) * coords, np.full((1,) * coords, float(c)))

    @classmethod
    def indicator(cls, lo, hi, r, value=1.0, coord=0, coords=None):
        """value * 1[t_coord in [lo, hi)] with dyadic endpoints at level r."""
        coords = coords or coord + 1
        n = 2 ** r
        a, b = lo * n, hi * n
        if a != int(a) or b != int(b):
            raise NonDyadicSupport("endpoints must be multiples of 2^-%d" % r)
        line = np.zeros(n)
        line[int(a):int(b)] = value
        res = [0] * coords
        res[coord] = r
        shape = [1] * coords
        shape[coord] = n
        return cls(tuple(res), line.reshape(shape))

    def refine(self, resolutions):
        resolutions = tuple(resolutions)
        if len(resolutions) < self.coords or any(
                a < b for a, b in zip(resolutions, self.resolutions)):
            raise GridIncompatible("cannot refine %s to %s"
                                   % (self.resolutions, resolutions))
        cells = 2 ** sum(resolutions)
        if cells > MAX_CELLS:
            raise GridIncompatible("common grid has %d cells" % cells)
        v = self.values.reshape(self.values.shape
                                + (1,) * (len(resolutions) - self.coords))
        for j, r in enumerate(resolutions):
            have = self.resolutions[j] if j < self.coords else 0
            if r > have:
                v = np.repeat(v, 2 ** (r - have), axis=j)
        return StepFunction(resolutions, v)

    def _binary(self, other, op):
        if not isinstance(other, StepFunction):
            return StepFunction(self.resolutions, op(self.values, float(other)))
        k = max(self.coords, other.coords)
        a = self.resolutions + (0,) * (k - self.coords)
        b = other.resolutions + (0,) * (k - other.coords)
        res = tuple(max(x, y) for x, y in zip(a, b))
        return StepFunction(res, op(self.refine(res).values,
                                    other.refine(res).values))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        return StepFunction(self.resolutions, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def to_dict(self):
        return {"coords": self.coords, "resolutions": list(self.resolutions),
                "values": self.values.ravel().tolist()}

    @classmethod
    def from_dict(cls, d):
        res = tuple(d["resolutions"])
        if len(res) != d.get("coords", len(res)):
            raise GridIncompatible("coords does not match resolutions")
        vals = np.asarray(d["values"], float).reshape([2 ** r for r in res])
        return cls(res, vals)


def _sum_abs(values):
    return math.fsum(np.abs(np.asarray(values, float)).ravel())


def l1_norm(f):
    # dividing by a power of two is exact
    return math.ldexp(_sum_abs(f.values), -f.cell_exponent)


def dm(f, g=None):
    """inf{eps > 0 : mu(|f - g| >= eps) <= eps}, exactly.

    With distinct positive values v_1 > ... > v_m of |f - g| and tail
    masses W_i = mu(|f - g| >= v_i), the tail equals W_i on (v_{i+1}, v_i]
    (v_{m+1} = 0) and 0 above v_1. On that piece the feasible part is
    [max(W_i, v_{i+1}), v_i] when W_i <= v_i, so the infimum is the least of
    v_1 and those left endpoints.
    """
    h = f if g is None else f - g
    a = np.abs(h.values).ravel()
    a = a[a > 0]
    if len(a) == 0:
        return 0.0
    vals, counts = np.unique(a, return_counts=True)
    vals, counts = vals[::-1], counts[::-1]
    W = [math.ldexp(c, -h.cell_exponent) for c in np.cumsum(counts)]
    best = float(vals[0])
    for i in range(len(vals)):
        nxt = float(vals[i + 1]) if i + 1 < len(vals) else 0.0
        if W[i] <= vals[i]:
            best = min(best, max(W[i], nxt))
    return best


# -- calculus checks --------------------------------------------------------

@dataclass
class CalculusReport:
    subadditive_lhs: float
    subadditive_rhs: float
    scaling: list
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    @property
    def min_margin(self):
        m = [self.subadditive_rhs - self.subadditive_lhs]
        m += [b - a for _, a, b in self.scaling]
        return min(m)


def check_dm_calculus(fs, lambdas, tol=0.0):
    """d_m(sum f_i, 0) <= sum d_m(f_i, 0) and d_m(l f, 0) <= d_m(f, 0)."""
    fs = list(fs)
    viol = []
    lhs = rhs = 0.0
    if fs:
        total = fs[0]
        for f in fs[1:]:
            total = total + f
        lhs = dm(total)
        rhs = math.fsum(dm(f) for f in fs)
        if lhs > rhs + tol:
            viol.append(("subadditivity", lhs, rhs))
    scaling = []
    for i, f in enumerate(fs):
        base = dm(f)
        for lam in lambdas:
            if not (0 <= lam <= 1):
                raise ValueError("lambda must lie in [0, 1]")
            v = dm(f * lam)
            scaling.append((lam, v, base))
            if v > base + tol:
                viol.append(("scaling", i, lam, v, base))
    return CalculusReport(lhs, rhs, scaling, viol)


def random_step(rng, max_coords=2, max_res=3, scale=4):
    """Seeded step function with dyadic values (multiples of 1/8)."""
    k = int(rng.integers(1, max_coords + 1))
    res = tuple(int(r) for r in rng.integers(0, max_res + 1, size=k))
    shape = [2 ** r for r in res]
    vals = rng.integers(-8 * scale, 8 * scale + 1, size=shape) / 8.0
    # sparsify so small-support behaviour is exercised
    vals = np.where(rng.random(shape) < 0.5, vals, 0.0)
    return StepFunction(res, vals)


# -- near-disjointness ------------------------------------------------------

@dataclass
class NearDisjointReport:
    delta: float
    all_passed: bool
    collapsed: bool
    log: list


def _default_probes(count, seed):
    rng = np.random.default_rng([int(seed), 4242])
    probes = []
    for j in range(1, count + 1):
        s = 2.0 ** -j
        r = j
        start = int(rng.integers(0, 2 ** r)) / 2 ** r
        height = float(rng.integers(1, 5))
        probes.append(StepFunction.indicator(start, start + s, r,
                                             height / s))
    return probes


def near_disjointness_scan(H, eps, probe_count=10, seed=0, probes=None):
    """Empirical delta: probes with d_m(f, 0) < delta kept
    ||f + g|| >= ||f|| + ||g|| - eps for every g in H."""
    H = list(H)
    if not H:
        raise ValueError("H must be nonempty")
    if eps <= 0:
        raise ValueError("eps must be positive")
    probes = list(probes) if probes is not None else \
        _default_probes(probe_count, seed)
    if not probes:
        raise ValueError("no probes")
    log = []
    for idx, f in enumerate(probes):
        d = dm(f)
        nf = l1_norm(f)
        worst = -math.inf
        for g in H:
            deficit = nf + l1_norm(g) - l1_norm(f + g)
            worst = max(worst, deficit)
        log.append({"probe": idx, "dm": d, "norm": nf,
                    "worst_deficit": worst, "ok": worst <= eps})
    log.sort(key=lambda e: (-e["dm"], e["probe"]))
    failing = [e["dm"] for e in log if not e["ok"]]
    floor = min(e["dm"] for e in log)
    if not failing:
        return NearDisjointReport(max(e["dm"] for e in log), True, False, log)
    delta = min(failing)
    return NearDisjointReport(delta, False, delta <= floor, log)


# -- spikes -----------------------------------------------------------------

def _dyadic_level(s):
    s = Fraction(s).limit_denominator(2 ** 60) if isinstance(s, float) \
        else Fraction(s)
    if not (0 < s < 1) or s.numerator != 1 or \
            s.denominator & (s.denominator - 1):
        raise NonDyadicSupport("support %s is not 2^-j with j >= 1" % s)
    return s.denominator.bit_length() - 1


def spike_family(s, n):
    """f_j = (1/s) 1[t_j < s], j = 0..n-1, each on its own coordinate."""
    j = _dyadic_level(s)
    if n < 1:
        raise ValueError("n must be >= 1")
    s = 2.0 ** -j
    return [StepFunction.indicator(0.0, s, j, 1.0 / s, coord=c, coords=n)
            for c in range(n)]


def binomial_deficit(s, n):
    """sum_k C(n,k) s^k (1-s)^(n-k) |k/(ns) - 1|, as an exact fraction."""
    s = Fraction(1, 2 ** _dyadic_level(s))
    return sum(Fraction(math.comb(n, k)) * s ** k * (1 - s) ** (n - k)
               * abs(Fraction(k) / (n * s) - 1) for k in range(n + 1))


def grid_deficit(s, n):
    """||(1/n) sum f_j - 1|| by summing over every cell of the product grid.

    The average on a cell is k/(n s), where k counts the spikes active
    there, so cells are tallied by k with integer arithmetic.
    """
    j = _dyadic_level(s)
    if n > MAX_GRID_N or 2 ** (j * n) > MAX_CELLS:
        raise GridTooLarge("grid path limited to n <= %d and %d cells"
                           % (MAX_GRID_N, MAX_CELLS))
    fam = spike_family(s, n)
    K = np.zeros((1,) * n, dtype=np.int16)
    for f in fam:
        K = K + (f.values > 0).astype(np.int16)
    counts = np.bincount(K.ravel(), minlength=n + 1)
    cells = 2 ** (j * n)
    sf = Fraction(1, 2 ** j)
    return sum(Fraction(int(c), cells) * abs(Fraction(k) / (n * sf) - 1)
               for k, c in enumerate(counts))


@dataclass
class DeficitResult:
    value: float
    exact: Fraction
    grid: Optional[Fraction]
    oracle: Fraction


def spike_average_deficit(s, n):
    """||(1/n) sum f_j - 1||, by the grid (when small enough) and the
    binomial formula; the two must agree."""
    oracle = binomial_deficit(s, n)
    try:
        grid = grid_deficit(s, n)
    except GridTooLarge:
        grid = None
    if grid is not None and abs(float(grid - oracle)) > 1e-12:
        raise InvariantViolation("grid %s != binomial %s" % (grid, oracle))
    return DeficitResult(float(oracle), oracle, grid, oracle)
