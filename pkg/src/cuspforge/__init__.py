"""Deformations of cusped hyperbolic 3-manifolds, orientable or not."""

from .geometry import (INFINITY, ExtendedIsometry, ShapeAssignment, apply, compose, inverse,
                       shape_triple, trace_invariant)
from .triangulation import Triangulation, load_triangulation, orientation_double_cover
from .solver import SolveTarget, continue_to, newton_solve, residual, solve_path
from .holonomy import dehn_coefficients, evaluate_word, track_logs
from .klein import classify, completion_geometry

__version__ = "0.1.0"

__all__ = [
    "INFINITY", "ExtendedIsometry", "ShapeAssignment", "apply", "compose", "inverse",
    "shape_triple", "trace_invariant", "Triangulation", "load_triangulation",
    "orientation_double_cover", "SolveTarget", "continue_to", "newton_solve", "residual",
    "solve_path", "dehn_coefficients", "evaluate_word", "track_logs", "classify",
    "completion_geometry",
]
