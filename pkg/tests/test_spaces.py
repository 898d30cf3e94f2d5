import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slicegeom import spaces as S
from slicegeom.errors import (DimensionBudgetExceeded, DimensionMismatch,
                              NotPolytopal, ZeroVector)
from slicegeom.polytope import enumerate_bfs, gauge_lp

from conftest import INF, space_zoo

ZOO = space_zoo()
POLY = [s for s in ZOO if s.polytopal]
LIP3 = [[0, 1, 1], [1, 0, 0.5], [1, 0.5, 0]]


def vec(dim):
    return st.lists(st.floats(-3, 3, allow_nan=False), min_size=dim,
                    max_size=dim).map(np.array)


# -- validation -------------------------------------------------------------

def test_square_is_valid():
    assert S.validate(S.polytope_v([[1, 1], [1, -1], [-1, 1], [-1, -1]])).ok


def test_asymmetric_vertices_rejected():
    rep = S.validate(S.polytope_v([[1, 0], [0, 1]]))
    assert not rep.ok
    assert any("symmetric" in e for e in rep.errors)


def test_triangle_inequality_rejected():
    rep = S.validate(S.lip([[0, 5, 1], [5, 0, 1], [1, 1, 0]]))
    assert not rep.ok
    assert any("triangle" in e for e in rep.errors)


def test_facet_offsets_must_be_positive():
    rep = S.validate(S.polytope_h([[1, 0], [-1, 0], [0, 1], [0, -1]],
                                  [1, 1, 0, 0]))
    assert not rep.ok


def test_sum_dimension_recorded():
    s = S.lp_sum(S.lp(2, 2), S.lp(3, 1), 2)
    assert s.dim == 5 and S.validate(s).ok


@pytest.mark.parametrize("spec", ZOO, ids=lambda s: s.label)
def test_zoo_is_valid(spec):
    assert S.validate(spec).ok


# -- norms ------------------------------------------------------------------

def test_norm_examples():
    assert S.norm(S.lp(2, INF), [1, 1]) == 1
    assert S.norm(S.lip(LIP3), [1, 0]) == pytest.approx(2.0, abs=1e-15)
    s = S.lp_sum(S.lp(1, 2), S.lp(1, 2), 1)
    assert S.norm(s, [3, 4]) == 7


def test_norm_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        S.norm(S.lp(2, 2), [1, 2, 3])


def test_dual_norm_examples():
    assert S.dual_norm(S.lp(2, 1), [3, -4]) == 4
    sq = S.polytope_v([[1, 1], [1, -1], [-1, 1], [-1, -1]])
    assert S.dual_norm(sq, [1, 1]) == pytest.approx(2)
    for s in ZOO:
        assert S.dual_norm(s, np.zeros(s.dim)) == 0


@pytest.mark.parametrize("spec", ZOO, ids=lambda s: s.label)
def test_holder_on_random_pairs(spec):
    rng = np.random.default_rng(5)
    F = rng.standard_normal((1000, spec.dim))
    X = rng.standard_normal((1000, spec.dim))
    nx = S.norm(spec, X)
    for f, x, n in zip(F[:200], X[:200], nx[:200]):
        assert f @ x <= S.dual_norm(spec, f) * n + 1e-9
    # the vectorised fast path must agree on all 1000
    sv = S.support_value(spec, F)
    assert np.all(np.sum(F * X, axis=1) <= sv * nx + 1e-9)


@pytest.mark.parametrize("spec", ZOO, ids=lambda s: s.label)
@given(data=st.data())
def test_norm_axioms(spec, data):
    x = data.draw(vec(spec.dim))
    y = data.draw(vec(spec.dim))
    t = data.draw(st.floats(-4, 4, allow_nan=False))
    nx, ny = S.norm(spec, x), S.norm(spec, y)
    assert S.norm(spec, x + y) <= nx + ny + 1e-9
    assert S.norm(spec, t * x) == pytest.approx(abs(t) * nx, rel=1e-9,
                                                abs=1e-12)
    assert (nx == 0) == (not np.any(x))


@pytest.mark.parametrize("spec", POLY, ids=lambda s: s.label)
def test_vertices_have_unit_norm(spec):
    V = S.ball_vertices(spec)
    assert np.allclose(S.norm(spec, V), 1.0, atol=1e-10)


def test_polytope_v_norm_matches_gauge_lp(hexagon):
    rng = np.random.default_rng(2)
    V = np.asarray(hexagon.vertices)
    for x in rng.standard_normal((50, 2)):
        assert S.norm(hexagon, x) == pytest.approx(gauge_lp(V, x), abs=1e-9)


@pytest.mark.parametrize("spec", POLY, ids=lambda s: s.label)
def test_dual_lp_matches_vertex_max(spec):
    rng = np.random.default_rng(11)
    V = S.ball_vertices(spec)
    for f in rng.standard_normal((20, spec.dim)):
        assert S.dual_norm(spec, f) == pytest.approx(float(np.max(V @ f)),
                                                     abs=1e-9)


@pytest.mark.parametrize("p", [1, 2, 3.5, INF])
@given(data=st.data())
def test_sum_norm_is_p_combination(p, data):
    left, right = S.lp(2, 2), S.lp(1, 2)
    s = S.lp_sum(left, right, p)
    x = data.draw(vec(3))
    a, b = S.norm(left, x[:2]), S.norm(right, x[2:])
    naive = max(a, b) if math.isinf(p) else (a ** p + b ** p) ** (1 / p)
    assert S.norm(s, x) == float(S._pcombine(a, b, p))
    if all(v == 0 or v > 1e-80 for v in (a, b)):  # naive form underflows
        assert S.norm(s, x) == pytest.approx(naive, rel=1e-12, abs=1e-300)


@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=2))
def test_lip_norm_zero_iff_zero(f):
    spec = S.lip(LIP3)
    f = np.array(f)
    assert (S.norm(spec, f) == 0) == (not np.any(f))


# -- projection and sampling ------------------------------------------------

def test_project_examples():
    assert np.allclose(S.project_to_sphere(S.lp(2, 2), [3, 4]), [0.6, 0.8])
    assert np.allclose(S.project_to_sphere(S.lp(2, INF), [2, 1]), [1, 0.5])
    with pytest.raises(ZeroVector):
        S.project_to_sphere(S.lp(2, 2), [0, 0])


@pytest.mark.parametrize("spec", ZOO, ids=lambda s: s.label)
@given(data=st.data())
def test_projection_has_unit_norm(spec, data):
    x = data.draw(vec(spec.dim))
    if not np.any(x):
        return
    assert abs(S.norm(spec, S.project_to_sphere(spec, x)) - 1) <= 1e-12


def test_sample_lists_vertices_first():
    sq = S.polytope_v([[1, 1], [1, -1], [-1, 1], [-1, -1]])
    pts = S.sphere_sample(sq, 3, 10)
    first = {tuple(np.round(p, 12)) for p in pts[:4]}
    assert first == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    assert len(pts) == 10


def test_sample_deterministic_and_normalised():
    spec = S.lp(3, 2)
    a = S.sphere_sample(spec, 9, 1000)
    b = S.sphere_sample(spec, 9, 1000)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert np.all(np.abs(S.norm(spec, np.array(a)) - 1) <= 1e-12)


# -- vertices ---------------------------------------------------------------

def _as_set(V):
    return {tuple(np.round(v, 9)) for v in V}


def test_cross_polytope_vertices():
    assert _as_set(S.ball_vertices(S.lp(2, 1))) == \
        {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_lip_vertices_from_h_enumeration():
    want = {(1, 1), (-1, -1), (1, 0.5), (-1, -0.5), (0.5, 1), (-0.5, -1)}
    assert _as_set(S.ball_vertices(S.lip(LIP3))) == want


def test_smooth_ball_has_no_vertices():
    with pytest.raises(NotPolytopal):
        S.ball_vertices(S.lp(2, 2))


def test_dimension_budget():
    with pytest.raises(DimensionBudgetExceeded):
        S.ball_vertices(S.lp(9, INF), max_dim=8)


@pytest.mark.parametrize("spec", POLY, ids=lambda s: s.label)
def test_qhull_vertices_match_bfs_enumeration(spec):
    A = spec.rows
    bfs = enumerate_bfs(A, np.ones(len(A)))
    assert _as_set(bfs) == _as_set(S.ball_vertices(spec))


# -- JSON -------------------------------------------------------------------

@pytest.mark.parametrize("spec", ZOO, ids=lambda s: s.label)
def test_json_round_trip(spec, tmp_path):
    path = tmp_path / "s.json"
    S.save(spec, path)
    a = S.load(path)
    S.save(a, tmp_path / "t.json")
    b = S.load(tmp_path / "t.json")
    assert a == b == spec
    assert a.name == b.name == "s"
    assert S.dumps(a) == S.dumps(b)


def test_p_infinity_serialised_as_string():
    assert json.loads(S.dumps(S.lp(2, INF)))["p"] == "inf"
    assert S.loads('{"kind": "lp", "dim": 2, "p": "inf"}').p == INF
