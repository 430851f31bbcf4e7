"""Quadratic assignment by a strongly convex relaxation with time-triggered dimension reduction."""

from .errors import TTDRAError
from .instance import (
    AssignmentResult,
    KnownSolution,
    QapInstance,
    parse_instance,
    parse_solution,
    read_instance,
    read_solution,
    write_result,
)
from .oracle import brute_force
from .projection import is_doubly_stochastic, project_ds
from .quadratic import apply_W, apply_W_sym, evaluate_permutation, objective_vec
from .relaxation import RelaxedProblem, build_relaxed, solve_relaxation, spectral_bounds
from .solver import SolverConfig, solve, trigger_count

__all__ = [
    "AssignmentResult",
    "KnownSolution",
    "QapInstance",
    "RelaxedProblem",
    "SolverConfig",
    "TTDRAError",
    "apply_W",
    "apply_W_sym",
    "brute_force",
    "build_relaxed",
    "evaluate_permutation",
    "is_doubly_stochastic",
    "objective_vec",
    "parse_instance",
    "parse_solution",
    "project_ds",
    "read_instance",
    "read_solution",
    "solve",
    "solve_relaxation",
    "spectral_bounds",
    "trigger_count",
    "write_result",
]
