"""Exact-ish geometry for origin-symmetric polytopes.

Representations used throughout:

* rows: an (m, d) array A with the body equal to {x : A x <= 1}
* vertices: an (k, d) array of extreme points

The H <-> V conversion goes through the polar body: the vertices of
{x : A x <= 1} are the facet normals of conv(rows), and vice versa. qhull
does the hull; a brute-force basic-feasible-solution enumerator is kept as
an independent cross-check.
"""
from itertools import combinations

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

DEDUP_TOL = 1e-10


def dedup(points, tol=DEDUP_TOL):
    """Drop points within `tol` (max-coordinate metric) of an earlier one."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        return pts
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    kept = []
    for p in pts:
        if kept:
            diff = np.max(np.abs(np.asarray(kept) - p), axis=1)
            if np.min(diff) <= tol:
                continue
        kept.append(p)
    return np.asarray(kept)


def _facets(points):
    """Rows a with conv(points) = {x : a.x <= 1}; origin must be interior."""
    points = np.asarray(points, dtype=float)
    d = points.shape[1]
    if d == 1:
        hi, lo = points.max(), points.min()
        if not (hi > 0 > lo):
            raise ValueError("origin not interior")
        return np.array([[1.0 / hi], [1.0 / lo]])
    hull = ConvexHull(points)
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    if np.any(offsets <= 1e-12):
        raise ValueError("origin not interior")
    return dedup(normals / offsets[:, None])


def extreme_points(points):
    points = np.asarray(points, dtype=float)
    if points.shape[1] == 1:
        return dedup(np.array([[points.max()], [points.min()]]))
    hull = ConvexHull(points)
    return dedup(points[hull.vertices])


def rows_from_vertices(vertices):
    return _facets(vertices)


def vertices_from_rows(rows):
    """Vertices of {x : rows @ x <= 1} (bounded, origin interior)."""
    return _facets(rows)


def prune_rows(rows):
    """Remove redundant inequalities of {x : rows @ x <= 1}."""
    return extreme_points(np.vstack([rows, np.zeros((1, rows.shape[1]))]))


def chebyshev_center(A, b):
    """Center and radius of the largest Euclidean ball inside {A x <= b}."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    d = A.shape[1]
    nrm = np.linalg.norm(A, axis=1)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([A, nrm[:, None]]), b_ub=b,
                  bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status != 0:
        return None, 0.0
    return res.x[:d], res.x[-1]


def halfspace_vertices(A, b):
    """Vertices of a bounded full-dimensional polytope {A x <= b}."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    center, radius = chebyshev_center(A, b)
    if center is None or radius <= 1e-12:
        return None
    slack = b - A @ center
    verts = _facets(A / slack[:, None]) + center
    return verts


def enumerate_bfs(A, b, tol=1e-9):
    """Brute-force vertex enumeration: solve every d-subset of tight rows."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    d = A.shape[1]
    found = []
    for idx in combinations(range(len(A)), d):
        sub = A[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(idx)])
        if np.all(A @ x <= b + tol):
            found.append(x)
    return dedup(np.asarray(found)) if found else np.zeros((0, d))


def gauge_lp(vertices, x):
    """min{t >= 0 : x in t * conv(vertices)} by linear programming."""
    V = np.asarray(vertices, float)
    x = np.asarray(x, float)
    k = len(V)
    res = linprog(np.ones(k), A_eq=V.T, b_eq=x, bounds=[(0, None)] * k,
                  method="highs")
    if res.status != 0:
        raise ValueError("gauge LP failed: %s" % res.message)
    return float(res.fun)
