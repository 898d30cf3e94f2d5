"""Finite-dimensional real normed spaces.

Five kinds are supported: polytopal balls given by vertices or by facets,
l_p^d, Lip_0 over a finite metric space (coordinates are the function values
at the non-base points, in index order) and l_p-sums of two spaces.
"""
import json
import math
import os
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from . import polytope
from .errors import (DimensionBudgetExceeded, DimensionMismatch, NotPolytopal,
                     ZeroVector)

KINDS = ("polytope_v", "polytope_h", "lp", "lip", "sum")
SYM_TOL = 1e-10


def _conj(p):
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _scaled_pnorm(a, p):
    """p-norm of nonnegative entries along the last axis, scaled by the
    largest entry so tiny or huge vectors neither underflow nor overflow."""
    m = np.max(a, axis=-1)
    safe = np.where(m > 0, m, 1.0)
    r = a / np.expand_dims(safe, -1)
    if p == 2:
        s = np.sqrt(np.sum(r * r, axis=-1))
    else:
        s = np.sum(r ** p, axis=-1) ** (1.0 / p)
    return np.where(m > 0, m * s, 0.0)


def _pcombine(a, b, p):
    if math.isinf(p):
        return np.maximum(a, b)
    if p == 1:
        return a + b
    return _scaled_pnorm(np.stack(np.broadcast_arrays(a, b), axis=-1), p)


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    dim: int
    vertices: tuple = ()
    facets: tuple = ()  # ((normal tuple, offset), ...)
    p: float = None
    metric: tuple = ()
    base: int = 0
    left: "SpaceSpec" = None
    right: "SpaceSpec" = None
    name: str = field(default="", compare=False)

    @property
    def label(self):
        return self.name or describe(self)

    @cached_property
    def polytopal(self):
        if self.kind in ("polytope_v", "polytope_h", "lip"):
            return True
        if self.kind == "lp":
            # every norm on the line is |t|
            return self.dim == 1 or self.p == 1 or math.isinf(self.p)
        if self.kind == "sum":
            return ((self.p == 1 or math.isinf(self.p))
                    and self.left.polytopal and self.right.polytopal)
        return False

    @cached_property
    def rows(self):
        """Non-redundant rows A with B_X = {x : A x <= 1}."""
        if not self.polytopal:
            raise NotPolytopal(self.label)
        return _rows(self)

    @cached_property
    def _lip_pairs(self):
        M = np.asarray(self.metric, float)
        n = len(M)
        others = [i for i in range(n) if i != self.base]
        col = {pt: k for k, pt in enumerate(others)}
        I, J, D = [], [], []
        for i in range(n):
            for j in range(i + 1, n):
                I.append(col.get(i, -1))
                J.append(col.get(j, -1))
                D.append(M[i, j])
        return np.array(I), np.array(J), np.array(D)

    @cached_property
    def _lip_rows_all(self):
        I, J, D = self._lip_pairs
        R = np.zeros((len(D), self.dim))
        for k, (i, j, d) in enumerate(zip(I, J, D)):
            if i >= 0:
                R[k, i] += 1.0 / d
            if j >= 0:
                R[k, j] -= 1.0 / d
        return np.vstack([R, -R])

    @cached_property
    def _vertex_cache(self):
        return _vertices(self)

    @cached_property
    def _scaled_facets(self):
        A = np.asarray([f[0] for f in self.facets], float)
        b = np.asarray([f[1] for f in self.facets], float)
        return A / b[:, None]


# -- constructors -----------------------------------------------------------

def polytope_v(vertices, name=""):
    V = tuple(tuple(float(c) for c in v) for v in vertices)
    return SpaceSpec("polytope_v", len(V[0]), vertices=V, name=name)


def polytope_h(normals, offsets, name=""):
    F = tuple((tuple(float(c) for c in a), float(b))
              for a, b in zip(normals, offsets))
    return SpaceSpec("polytope_h", len(F[0][0]), facets=F, name=name)


def lp(dim, p, name=""):
    return SpaceSpec("lp", int(dim), p=_parse_p(p), name=name)


def lip(metric, base=0, name=""):
    M = tuple(tuple(float(c) for c in row) for row in metric)
    return SpaceSpec("lip", len(M) - 1, metric=M, base=int(base), name=name)


def lp_sum(left, right, p, name=""):
    return SpaceSpec("sum", left.dim + right.dim, p=_parse_p(p), left=left,
                     right=right, name=name)


def grid_metric(k):
    """Metric of the points {0, 2^-k, ..., 1} on the real line."""
    pts = np.arange(2 ** k + 1) / 2 ** k
    return np.abs(pts[:, None] - pts[None, :])


def describe(spec):
    if spec.kind == "lp":
        return "l%s^%d" % ("inf" if math.isinf(spec.p) else "%g" % spec.p,
                           spec.dim)
    if spec.kind == "sum":
        return "(%s+%s)_%s" % (describe(spec.left), describe(spec.right),
                               "inf" if math.isinf(spec.p) else "%g" % spec.p)
    if spec.kind == "lip":
        return "Lip0(M%d)" % (spec.dim + 1)
    n = len(spec.vertices) if spec.kind == "polytope_v" else len(spec.facets)
    return "%s[%d,%d]" % (spec.kind, spec.dim, n)


# -- validation -------------------------------------------------------------

@dataclass
class ValidationReport:
    ok: bool
    errors: list

    def __bool__(self):
        return self.ok


def validate(spec):
    errors = []
    _validate(spec, errors, "")
    return ValidationReport(not errors, errors)


def _validate(spec, errors, where):
    if spec.kind not in KINDS:
        errors.append("%skind: unknown kind %r" % (where, spec.kind))
        return
    if not isinstance(spec.dim, (int, np.integer)) or spec.dim < 1:
        errors.append("%sdim: must be a positive integer" % where)
        return
    d = spec.dim
    if spec.kind == "polytope_v":
        V = np.asarray(spec.vertices, float)
        if V.ndim != 2 or V.shape[1] != d:
            errors.append("%svertices: expected %d-vectors" % (where, d))
            return
        for i, v in enumerate(V):
            if np.min(np.max(np.abs(V + v), axis=1)) > SYM_TOL:
                errors.append("%svertices[%d]: negation not in vertex set "
                              "(ball not symmetric)" % (where, i))
        if np.linalg.matrix_rank(V) < d:
            errors.append("%svertices: hull not full-dimensional" % where)
    elif spec.kind == "polytope_h":
        if not spec.facets:
            errors.append("%sfacets: empty" % where)
            return
        A = np.asarray([f[0] for f in spec.facets], float)
        b = np.asarray([f[1] for f in spec.facets], float)
        if A.ndim != 2 or A.shape[1] != d:
            errors.append("%sfacets: expected %d-vector normals" % (where, d))
            return
        for i in np.nonzero(b <= 0)[0]:
            errors.append("%sfacets[%d]: offset must be positive" % (where, i))
        for i in range(len(A)):
            hit = (np.max(np.abs(A + A[i]), axis=1) <= SYM_TOL) & \
                  (np.abs(b - b[i]) <= SYM_TOL)
            if not hit.any():
                errors.append("%sfacets[%d]: (-normal, offset) missing "
                              "(ball not symmetric)" % (where, i))
        if np.linalg.matrix_rank(A) < d:
            errors.append("%sfacets: ball is unbounded" % where)
    elif spec.kind == "lp":
        if spec.p is None or not (spec.p >= 1):
            errors.append("%sp: exponent must lie in [1, inf]" % where)
    elif spec.kind == "lip":
        M = np.asarray(spec.metric, float)
        if M.shape != (d + 1, d + 1):
            errors.append("%smetric: expected a %dx%d matrix"
                          % (where, d + 1, d + 1))
            return
        n = d + 1
        if not (0 <= spec.base < n):
            errors.append("%sbase: index out of range" % where)
        for i in np.nonzero(np.diag(M) != 0)[0]:
            errors.append("%smetric[%d][%d]: diagonal must be 0"
                          % (where, i, i))
        for i, j in zip(*np.nonzero(np.triu(M != M.T))):
            errors.append("%smetric[%d][%d]: not symmetric" % (where, i, j))
        off = ~np.eye(n, dtype=bool)
        for i, j in zip(*np.nonzero(off & ~(M > 0))):
            errors.append("%smetric[%d][%d]: must be positive" % (where, i, j))
        via = M[:, :, None] + M[None, :, :]  # via[i, k, j] = d(i,k) + d(k,j)
        bad = M[:, None, :] > via + 1e-12
        for i, k, j in zip(*np.nonzero(bad)):
            if i < j:
                errors.append("%smetric: triangle inequality fails for "
                              "(%d,%d) via %d" % (where, i, j, k))
    elif spec.kind == "sum":
        if spec.left is None or spec.right is None:
            errors.append("%sleft/right: both components required" % where)
            return
        if spec.p is None or not (spec.p >= 1):
            errors.append("%sp: exponent must lie in [1, inf]" % where)
        _validate(spec.left, errors, where + "left.")
        _validate(spec.right, errors, where + "right.")
        if spec.dim != spec.left.dim + spec.right.dim:
            errors.append("%sdim: must equal left.dim + right.dim" % where)


# -- norms ------------------------------------------------------------------

def _check(spec, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.dim:
        raise DimensionMismatch("expected dimension %d, got %d"
                                % (spec.dim, x.shape[-1]))
    return x


def norm(spec, x):
    """Norm of x (last axis); vectorised over leading axes."""
    x = _check(spec, x)
    out = _norm(spec, x)
    return float(out) if np.ndim(out) == 0 else out


def _norm(spec, x):
    k = spec.kind
    if k == "lp":
        if spec.p == 1:
            return np.sum(np.abs(x), axis=-1)
        if math.isinf(spec.p):
            return np.max(np.abs(x), axis=-1)
        return _scaled_pnorm(np.abs(x), spec.p)
    if k == "polytope_h":
        return np.maximum(np.max(x @ spec._scaled_facets.T, axis=-1), 0.0)
    if k == "polytope_v":
        return np.maximum(np.max(x @ spec.rows.T, axis=-1), 0.0)
    if k == "lip":
        I, J, D = spec._lip_pairs
        z = np.zeros(x.shape[:-1] + (1,))
        full = np.concatenate([x, z], axis=-1)  # column -1 is the base point
        return np.max(np.abs(full[..., I] - full[..., J]) / D, axis=-1)
    if k == "sum":
        d1 = spec.left.dim
        return _pcombine(_norm(spec.left, x[..., :d1]),
                         _norm(spec.right, x[..., d1:]), spec.p)
    raise ValueError(k)


def dual_norm(spec, f):
    """sup of <f, x> over the unit ball."""
    f = _check(spec, f)
    k = spec.kind
    if not np.any(f):
        return 0.0
    if k == "lp":
        return float(np.linalg.norm(f, ord=_conj(spec.p)))
    if k == "polytope_v":
        return float(np.max(np.asarray(spec.vertices) @ f))
    if k in ("polytope_h", "lip"):
        if k == "lip":
            A = spec._lip_rows_all
            b = np.ones(len(A))
        else:
            A = np.asarray([fc[0] for fc in spec.facets])
            b = np.asarray([fc[1] for fc in spec.facets])
        res = linprog(-f, A_ub=A, b_ub=b, bounds=[(None, None)] * spec.dim,
                      method="highs", options={"primal_feasibility_tolerance":
                                               1e-9})
        if res.status != 0:
            raise RuntimeError("dual norm LP failed: %s" % res.message)
        return float(-res.fun)
    if k == "sum":
        d1 = spec.left.dim
        a = dual_norm(spec.left, f[:d1])
        b = dual_norm(spec.right, f[d1:])
        return float(_pcombine(a, b, _conj(spec.p)))
    raise ValueError(k)


def norm_grad(spec, x):
    """A norming functional: g with <g, x> = ||x|| and dual norm <= 1."""
    x = _check(spec, x).astype(float)
    k = spec.kind
    if k == "lp":
        p = spec.p
        if p == 1:
            return np.sign(x)
        if math.isinf(p):
            g = np.zeros_like(x)
            i = int(np.argmax(np.abs(x)))
            g[i] = np.sign(x[i])
            return g
        n = _norm(spec, x)
        if n == 0:
            return np.zeros_like(x)
        return np.sign(x) * (np.abs(x) / n) ** (p - 1)
    if k == "polytope_h":
        A = spec._scaled_facets
    elif k == "lip":
        A = spec._lip_rows_all
    elif k == "polytope_v":
        A = spec.rows
    else:
        d1 = spec.left.dim
        a, b = x[:d1], x[d1:]
        na, nb = _norm(spec.left, a), _norm(spec.right, b)
        ga, gb = norm_grad(spec.left, a), norm_grad(spec.right, b)
        p = spec.p
        if p == 1:
            ca, cb = 1.0, 1.0
        elif math.isinf(p):
            ca, cb = (1.0, 0.0) if na >= nb else (0.0, 1.0)
        else:
            tot = _pcombine(na, nb, p)
            if tot == 0:
                return np.zeros_like(x)
            ca, cb = (na / tot) ** (p - 1), (nb / tot) ** (p - 1)
        return np.concatenate([ca * ga, cb * gb])
    vals = A @ x
    i = int(np.argmax(vals))
    if vals[i] <= 0:
        return np.zeros_like(x)
    return A[i].copy()


def support_value(spec, f):
    """Fast sup of <f, x> over the ball (vertex max when polytopal)."""
    f = np.asarray(f, float)
    if spec.polytopal:
        return np.max(ball_vertices(spec, max_dim=64) @ f.T, axis=0)
    if spec.kind == "lp":
        return np.linalg.norm(f, ord=_conj(spec.p), axis=-1)
    if spec.kind == "sum":
        d1 = spec.left.dim
        return _pcombine(support_value(spec.left, f[..., :d1]),
                         support_value(spec.right, f[..., d1:]), _conj(spec.p))
    return dual_norm(spec, f)


def project_to_sphere(spec, x):
    x = _check(spec, x)
    n = _norm(spec, x)
    if np.any(n == 0):
        raise ZeroVector("cannot normalise the zero vector")
    y = x / np.expand_dims(n, -1)
    # one correction pass absorbs the rounding of the first division
    y = y / np.expand_dims(_norm(spec, y), -1)
    return y


def sphere_sample(spec, seed, count, max_dim=8):
    """Deterministic unit-sphere sample; polytopal balls list vertices first.

    Each random point is drawn from its own stream keyed by (seed, index),
    so the list does not depend on how callers split the work.
    """
    pts = []
    if spec.polytopal and spec.dim <= max_dim:
        pts.extend(project_to_sphere(spec, ball_vertices(spec, max_dim)))
    for i in range(max(0, count - len(pts))):
        rng = np.random.default_rng([seed, i])
        g = rng.standard_normal(spec.dim)
        while not np.any(g):
            g = rng.standard_normal(spec.dim)
        pts.append(project_to_sphere(spec, g))
    return [np.asarray(p) for p in pts]


# -- polytopal geometry -----------------------------------------------------

def ball_vertices(spec, max_dim=8):
    """Extreme points of the unit ball, sorted lexicographically."""
    if not spec.polytopal:
        raise NotPolytopal("%s has a smooth ball" % spec.label)
    if spec.dim > max_dim:
        raise DimensionBudgetExceeded("dim %d > budget %d"
                                      % (spec.dim, max_dim))
    return spec._vertex_cache


def _rows(spec):
    k = spec.kind
    d = spec.dim
    if k == "polytope_h":
        A = np.asarray([f[0] for f in spec.facets], float)
        b = np.asarray([f[1] for f in spec.facets], float)
        return polytope.prune_rows(A / b[:, None])
    if k == "polytope_v":
        return polytope.rows_from_vertices(np.asarray(spec.vertices, float))
    if k == "lip":
        return polytope.prune_rows(spec._lip_rows_all)
    if k == "lp":
        if spec.p == 1:
            return _sign_vectors(d)
        return np.vstack([np.eye(d), -np.eye(d)])
    if k == "sum":
        A, C = spec.left.rows, spec.right.rows
        if math.isinf(spec.p):
            return np.vstack([np.hstack([A, np.zeros((len(A), C.shape[1]))]),
                              np.hstack([np.zeros((len(C), A.shape[1])), C])])
        return np.asarray([np.concatenate([a, c]) for a in A for c in C])
    raise ValueError(k)


def _vertices(spec):
    k = spec.kind
    d = spec.dim
    if k == "polytope_v":
        V = polytope.extreme_points(np.asarray(spec.vertices, float))
    elif k == "lp":
        V = np.vstack([np.eye(d), -np.eye(d)]) if spec.p == 1 \
            else _sign_vectors(d)
    elif k == "sum":
        P, Q = _vertices(spec.left), _vertices(spec.right)
        if math.isinf(spec.p):
            V = np.asarray([np.concatenate([a, b]) for a in P for b in Q])
        else:
            V = np.vstack([
                np.hstack([P, np.zeros((len(P), Q.shape[1]))]),
                np.hstack([np.zeros((len(Q), P.shape[1])), Q])])
    else:
        V = polytope.vertices_from_rows(spec.rows)
    V = polytope.dedup(V)
    V.setflags(write=False)
    return V


def _sign_vectors(d):
    grid = np.array(np.meshgrid(*[[-1.0, 1.0]] * d, indexing="ij"))
    return grid.reshape(d, -1).T


def facet_centroids(spec, max_dim=8):
    """Centroid of the vertices on each facet, one per facet row."""
    V = ball_vertices(spec, max_dim)
    A = spec.rows
    act = (V @ A.T) >= 1 - 1e-9
    out = []
    for r in range(len(A)):
        on = V[act[:, r]]
        if len(on):
            out.append(on.mean(axis=0))
    return np.asarray(out)


# -- JSON -------------------------------------------------------------------

def _parse_p(p):
    if p is None:
        return None
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity"):
            return math.inf
        return float(p)
    return float(p)


def to_dict(spec):
    d = {"kind": spec.kind, "dim": int(spec.dim)}
    if spec.name:
        d["name"] = spec.name
    if spec.kind == "polytope_v":
        d["vertices"] = [list(v) for v in spec.vertices]
    elif spec.kind == "polytope_h":
        d["facets"] = [{"normal": list(a), "offset": b}
                       for a, b in spec.facets]
    elif spec.kind == "lp":
        d["p"] = "inf" if math.isinf(spec.p) else spec.p
    elif spec.kind == "lip":
        d["metric"] = [list(r) for r in spec.metric]
        d["base"] = spec.base
    elif spec.kind == "sum":
        d["p"] = "inf" if math.isinf(spec.p) else spec.p
        d["left"] = to_dict(spec.left)
        d["right"] = to_dict(spec.right)
    return d


def from_dict(d):
    kind = d["kind"]
    name = d.get("name", "")
    if kind == "polytope_v":
        return polytope_v(d["vertices"], name=name)
    if kind == "polytope_h":
        return polytope_h([f["normal"] for f in d["facets"]],
                          [f["offset"] for f in d["facets"]], name=name)
    if kind == "lp":
        return lp(d["dim"], d["p"], name=name)
    if kind == "lip":
        return lip(d["metric"], d.get("base", 0), name=name)
    if kind == "sum":
        return lp_sum(from_dict(d["left"]), from_dict(d["right"]), d["p"],
                      name=name)
    return SpaceSpec(kind, int(d.get("dim", 0)), name=name)


def dumps(spec):
    return json.dumps(to_dict(spec), indent=2, ensure_ascii=False)


def loads(text):
    return from_dict(json.loads(text))


def load(path):
    with open(path, encoding="utf-8") as fh:
        spec = loads(fh.read())
    if not spec.name:
        spec = replace(spec, name=os.path.splitext(os.path.basename(path))[0])
    return spec


def save(spec, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(spec) + "\n")
