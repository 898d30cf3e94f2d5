import numpy as np
import pytest

from slicegeom import spaces as S
from slicegeom.errors import ResolutionTooLow, UnsupportedSpace
from slicegeom.oracle import boundary_grid, oracle_dist_2d

from oracles import euclid_cn


def test_euclidean_bracket(l2):
    br = oracle_dist_2d(l2, [1, 0], 1, 1.0, 2048)
    assert br.lower <= euclid_cn(1.0) <= br.upper
    assert br.upper - br.lower < 5e-3


def test_square_pair_bracket(linf):
    br = oracle_dist_2d(linf, [1, 1], 2, 2.0, 512)
    assert br.lower <= 0.5 <= br.upper + 1e-12


@pytest.mark.parametrize("th", [0.0, 0.7, 2.0])
def test_euclidean_alpha_two(l2, th):
    x = [np.cos(th), np.sin(th)]
    br = oracle_dist_2d(l2, x, 1, 2.0, 256)
    assert br.lower <= 1.0 <= br.upper + 1e-12


def test_hull_mode_inside(linf):
    br = oracle_dist_2d(linf, [0.2, 0.1], 3, 2.0, 256)
    assert br.upper == 0.0


def test_errors(l2):
    with pytest.raises(UnsupportedSpace):
        oracle_dist_2d(S.lp(3, 2), [1, 0, 0], 1, 1.0, 256)
    with pytest.raises(ResolutionTooLow):
        oracle_dist_2d(l2, [1, 0], 1, 1.0, 32)


def test_grid_includes_vertices(hexagon):
    pts, h = boundary_grid(hexagon, 64)
    V = S.ball_vertices(hexagon)
    for v in V:
        assert np.min(np.max(np.abs(pts - v), axis=1)) < 1e-12
    assert 0 < h < 0.2
