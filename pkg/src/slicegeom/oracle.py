"""Brute-force bracket for d(x, S_n^alpha(X)) on planar spaces.

The boundary of the ball is discretised, every boundary pair with
||u - v|| >= alpha contributes its midpoint, and distances are taken to the
resulting cloud (n = 1), to segments between cloud boundary points (n = 2) or
to the convex hull of the cloud (n >= 3, where conv_3 = conv in the plane).

Uppers are genuine: every point used is an exact element of S_n^alpha. The
lower bound subtracts the resolution term: h, the largest norm gap between
adjacent boundary points, plus the norm diameter of a bin when the cloud is
thinned to one representative per bin. It relies on the cloud being
h-dense in S^alpha, which is what the resolution term expresses.

Nothing here shares code with the solver in `hullsolve`.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import spaces as S
from .errors import ResolutionTooLow, UnsupportedSpace

SEP_TOL = 1e-12
_GOLD = (np.sqrt(5.0) - 1) / 2


@dataclass
class OracleBracket:
    lower: float
    upper: float
    resolution_term: float
    resolution: int
    cloud_size: int


def boundary_grid(space, resolution):
    """Sphere points at uniform angles (plus ball vertices), angle-sorted."""
    t = 2 * np.pi * np.arange(resolution) / resolution
    pts = S.project_to_sphere(space, np.column_stack([np.cos(t), np.sin(t)]))
    if space.polytopal:
        pts = np.vstack([pts, S.project_to_sphere(space,
                                                  S.ball_vertices(space))])
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    pts = pts[np.argsort(ang, kind="stable")]
    gaps = S.norm(space, pts - np.roll(pts, 1, axis=0))
    return pts, float(np.max(gaps))


def midpoint_cloud(space, pts, alpha, chunk=512):
    out = []
    for s in range(0, len(pts), chunk):
        P = pts[s:s + chunk]
        diff = P[:, None, :] - pts[None, :, :]
        sep = S.norm(space, diff)
        ii, jj = np.nonzero(sep >= alpha - SEP_TOL)
        keep = (ii + s) <= jj
        ii, jj = ii[keep], jj[keep]
        if len(ii):
            out.append(0.5 * (P[ii] + pts[jj]))
    return np.vstack(out) if out else np.zeros((0, 2))


def _bin(space, cloud, width, boundary_only):
    """One representative per occupied bin; optionally boundary bins only."""
    keys = np.floor(cloud / width).astype(np.int64)
    lo = keys.min(axis=0)
    keys -= lo
    shape = keys.max(axis=0) + 3
    flat = (keys[:, 0] + 1) * shape[1] + (keys[:, 1] + 1)
    uniq, first = np.unique(flat, return_index=True)
    reps = cloud[first]
    if boundary_only:
        occ = np.zeros(shape[0] * shape[1], dtype=bool)
        occ[uniq] = True
        occ = occ.reshape(shape)
        r, c = np.divmod(uniq, shape[1])
        edge = np.zeros(len(uniq), dtype=bool)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr or dc:
                    edge |= ~occ[r + dr, c + dc]
        reps = reps[edge]
    diag = max(S.norm(space, np.array([width, width])),
               S.norm(space, np.array([width, -width])))
    return reps, float(diag)


def _segment_min(space, x, P, Q, iters=64):
    """min over t in [0,1] of ||x - (Q + t (P - Q))||, vectorised (convex)."""
    D = P - Q

    def f(t):
        return S.norm(space, x - (Q + t[:, None] * D))

    a = np.zeros(len(P))
    b = np.ones(len(P))
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = b - _GOLD * (b - a)
        d_new = a + _GOLD * (b - a)
        # recompute both; cheap in 2D and avoids bookkeeping errors
        c, d = c_new, d_new
        fc, fd = f(c), f(d)
    t = 0.5 * (a + b)
    best = np.minimum(f(t), np.minimum(f(np.zeros(len(P))),
                                       f(np.ones(len(P)))))
    return best


def _inside_hull(hull, x):
    return bool(np.all(hull.equations[:, :2] @ x + hull.equations[:, 2]
                       <= 0))


def oracle_dist_2d(space, x, n, alpha, resolution, max_reps=1200):
    if space.dim != 2:
        raise UnsupportedSpace("oracle needs a planar space, got dim %d"
                               % space.dim)
    if resolution < 64:
        raise ResolutionTooLow("resolution must be >= 64")
    x = np.asarray(x, float)
    pts, h = boundary_grid(space, resolution)
    cloud = midpoint_cloud(space, pts, alpha)
    if len(cloud) == 0:
        raise RuntimeError("no admissible pairs at this resolution")
    if n == 1:
        upper = float(np.min(S.norm(space, x - cloud)))
        term = h
    else:
        width = h
        while True:
            reps, diag = _bin(space, cloud, width, boundary_only=(n == 2))
            if n != 2 or len(reps) <= max_reps:
                break
            width *= 1.5
        term = h + diag
        upper = float(np.min(S.norm(space, x - reps)))
        if n == 2:
            I, J = np.triu_indices(len(reps), k=1)
            for s in range(0, len(I), 65536):
                ii, jj = I[s:s + 65536], J[s:s + 65536]
                upper = min(upper, float(np.min(
                    _segment_min(space, x, reps[ii], reps[jj]))))
        else:
            try:
                hull = ConvexHull(reps)
            except QhullError:
                hull = None
            if hull is not None and _inside_hull(hull, x):
                upper = 0.0
            elif hull is not None:
                V = reps[hull.vertices]
                W = np.roll(V, -1, axis=0)
                upper = min(upper, float(np.min(_segment_min(space, x, V, W))))
    return OracleBracket(max(0.0, upper - term), upper, term, resolution,
                         len(cloud))
