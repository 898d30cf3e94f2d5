"""Slice geometry of finite-dimensional normed spaces."""
from .budget import DEFAULT_BUDGET, SolverBudget
from .errors import *  # noqa: F401,F403
from .spaces import (SpaceSpec, ball_vertices, dual_norm, grid_metric, lip,
                     lp, lp_sum, norm, polytope_h, polytope_v,
                     project_to_sphere, sphere_sample, validate)

__all__ = ["SolverBudget", "DEFAULT_BUDGET", "SpaceSpec", "ball_vertices",
           "dual_norm", "grid_metric", "lip", "lp", "lp_sum", "norm",
           "polytope_h", "polytope_v", "project_to_sphere", "sphere_sample",
           "validate"]
