import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from slicegeom import spaces as S
from slicegeom.budget import SolverBudget

settings.register_profile(
    "default", deadline=None, max_examples=40, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow,
                           HealthCheck.function_scoped_fixture])
settings.load_profile("default")

INF = math.inf
ACCEPTANCE = {}


def record(number, title, ok, detail=""):
    ACCEPTANCE[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        tr.write_line("criterion %2d: %s  %s%s" % (
            k, "PASS" if ok else "FAIL", title,
            ("  [" + detail + "]") if detail else ""))


def random_polygon(rng, k=None):
    """Origin-symmetric convex polygon from random half-plane points."""
    k = k or int(rng.integers(2, 6))
    ang = np.sort(rng.uniform(0, np.pi, k))
    rad = rng.uniform(0.6, 1.4, k)
    P = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    from slicegeom.polytope import extreme_points
    V = extreme_points(np.vstack([P, -P]))
    return S.polytope_v(V.tolist())


@pytest.fixture(scope="session")
def l2():
    return S.lp(2, 2, name="l2-2d")


@pytest.fixture(scope="session")
def linf():
    return S.lp(2, INF, name="linf-2d")


@pytest.fixture(scope="session")
def l1():
    return S.lp(2, 1, name="l1-2d")


@pytest.fixture(scope="session")
def hexagon():
    t = np.arange(6) * np.pi / 3
    return S.polytope_v(np.column_stack([np.cos(t), np.sin(t)]).tolist(),
                        name="hexagon")


@pytest.fixture(scope="session")
def small_budget():
    return SolverBudget(samples=12, starts=3, iterations=30)


def space_zoo():
    """Spaces used by the property tests."""
    t = np.arange(6) * np.pi / 3
    return [
        S.lp(2, 2), S.lp(2, INF), S.lp(2, 1), S.lp(3, 2), S.lp(3, 1),
        S.lp(3, 3.0), S.lp(2, 1.5),
        S.polytope_v(np.column_stack([np.cos(t), np.sin(t)]).tolist()),
        S.polytope_h([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]],
                     [1, 1, 1, 1, 1.5, 1.5]),
        S.lip(S.grid_metric(1)), S.lip(S.grid_metric(2)),
        S.lip([[0, 1, 1], [1, 0, 0.5], [1, 0.5, 0]]),
        S.lp_sum(S.lp(1, 2), S.lp(1, 2), 2),
        S.lp_sum(S.lp(2, 2), S.lp(1, 2), 1),
        S.lp_sum(S.lp(2, INF), S.lp(1, 2), INF),
        S.lp_sum(S.lp(2, 1), S.lp(2, INF), 1),
    ]
