"""Time-triggered dimension reduction for the QAP.

Projected steepest descent runs on the relaxed problem.  Every ``n_iter`` steps
the largest entry of the current doubly stochastic iterate is fixed to one: its
row and column are deleted from the iterate, the matching principal submatrices
are kept from ``A`` and ``B``, and the descent continues on the smaller problem.
After ``n`` fixings the fixed pairs form the returned permutation.

Deleting facility ``r`` and location ``c`` removes every variable in row ``r`` or
column ``c`` of ``X``; because ``W = B kron A``, the surviving block of ``W~`` is
``B[C, C] kron A[R, R] + shift * I`` for the active rows ``R`` and columns ``C``,
so the reduced operator stays matrix-free.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DescentViolation, InvalidSpectrum, TimedOut
from .instance import AssignmentResult, QapInstance
from .projection import project_ds
from .quadratic import evaluate_permutation, unvec, vec
from .relaxation import (
    RelaxedProblem,
    build_relaxed,
    projected_step,
    relaxed_objective,
    spectral_bounds,
    step_size,
)

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "ReductionState",
    "initial_state",
    "reduce",
    "solve",
    "step_size",
    "trigger_count",
]


@dataclass(frozen=True)
class SolverConfig:
    sigma: float = 1e6
    epsilon: float = 0.5
    eta: int = 100
    initial_niter: Optional[int] = None  # None means eta
    proj_tol: float = 1e-9
    max_sweeps: int = 10_000
    fold_cross_terms: bool = False
    spectral_refresh: str = "reuse"  # or "recompute"
    spectral_strategy: str = "auto"
    max_wall_time: Optional[float] = None  # seconds
    check_descent: bool = False

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.eta < 1:
            raise ValueError(f"eta must be >= 1, got {self.eta}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.initial_niter is not None and self.initial_niter < 1:
            raise ValueError("initial_niter must be >= 1")
        if self.spectral_refresh not in ("reuse", "recompute"):
            raise ValueError(f"spectral_refresh must be 'reuse' or 'recompute', got {self.spectral_refresh!r}")

    @property
    def first_niter(self) -> int:
        return self.eta if self.initial_niter is None else self.initial_niter

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def trigger_count(mu_min: float, mu_max: float, epsilon: float, eta: int) -> int:
    """Steps between fixings: ``ceil(log(1/eps) / (2 log((M+m)/(M-m))))`` clamped to ``[1, eta]``.

    ``m, M`` are the extremal eigenvalues of the shifted operator, so the ratio is
    the inverse steepest-descent contraction factor.
    """
    if not (np.isfinite(mu_min) and np.isfinite(mu_max)) or mu_min <= 0 or mu_max < mu_min:
        raise InvalidSpectrum(f"need 0 < mu_min <= mu_max, got ({mu_min}, {mu_max})")
    if not 0 < epsilon <= 1 or eta < 1:
        raise InvalidSpectrum(f"need epsilon in (0, 1] and eta >= 1, got ({epsilon}, {eta})")
    if mu_max == mu_min:
        return 1
    denom = 2.0 * math.log((mu_max + mu_min) / (mu_max - mu_min))
    if denom <= 0.0:  # ratio rounded to 1: mu_min negligible next to mu_max
        return eta
    value = math.log(1.0 / epsilon) / denom
    if value >= eta:
        return eta
    return min(max(math.ceil(value), 1), eta)


@dataclass
class ReductionState:
    """Solver state at reduction level ``level``.

    ``problem`` is the relaxed problem restricted to the active rows/columns
    (its instance holds ``A[R, R]``, ``B[C, C]`` and the matching slice of ``c``).
    ``spectral`` are the eigenvalue bounds of ``W~(level)`` that drive the trigger.
    """

    level: int
    x: np.ndarray
    active_rows: list[int]
    active_cols: list[int]
    partial_perm: dict[int, int]
    problem: RelaxedProblem
    spectral: tuple[float, float]
    root: RelaxedProblem = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.active_rows)

    @property
    def X(self) -> np.ndarray:
        return unvec(self.x, self.size)


def _restrict(root: RelaxedProblem, rows, cols, linear_matrix: np.ndarray) -> RelaxedProblem:
    inst = root.instance
    sub = QapInstance(
        inst.flow[np.ix_(rows, rows)],
        inst.distance[np.ix_(cols, cols)],
        vec(linear_matrix),
        inst.name,
    )
    return RelaxedProblem(sub, root.sigma, root.mu_min, root.mu_max, root.shift, -root.shift * len(rows))


def initial_state(rp: RelaxedProblem) -> ReductionState:
    n = rp.n
    return ReductionState(
        level=0,
        x=vec(np.full((n, n), 1.0 / n)),
        active_rows=list(range(n)),
        active_cols=list(range(n)),
        partial_perm={},
        problem=rp,
        spectral=rp.tilde_bounds,
        root=rp,
    )


def _cross_term_linear(root: RelaxedProblem, rows, cols, fr: int, fc: int) -> np.ndarray:
    """Linear coefficients ``2 W_sym[free, (fr, fc)]`` induced on free variables by fixing ``(fr, fc)``."""
    A, B = root.instance.flow, root.instance.distance
    return np.outer(A[rows, fr], B[cols, fc]) + np.outer(A[fr, rows], B[fc, cols])


def reduce(state: ReductionState, config: SolverConfig = SolverConfig()) -> ReductionState:
    """Fix the largest entry of the iterate and drop its row and column.

    Ties go to the smallest row, then the smallest column (reduced coordinates).
    """
    X = state.X
    r, c = np.unravel_index(int(np.argmax(X)), X.shape)
    orig_r, orig_c = state.active_rows[r], state.active_cols[c]
    partial = dict(state.partial_perm)
    partial[orig_r] = orig_c
    rows = [i for k, i in enumerate(state.active_rows) if k != r]
    cols = [j for k, j in enumerate(state.active_cols) if k != c]

    keep_r = np.arange(state.size) != r
    keep_c = np.arange(state.size) != c
    lin = state.problem.instance.linear_matrix[np.ix_(keep_r, keep_c)]
    if config.fold_cross_terms and rows:
        lin = lin + _cross_term_linear(state.root, rows, cols, orig_r, orig_c)

    root = state.root
    if not rows:
        empty = np.zeros(0)
        return ReductionState(state.level + 1, empty, rows, cols, partial, state.problem, state.spectral, root)

    problem = _restrict(root, rows, cols, lin)
    Y = X[np.ix_(keep_r, keep_c)]
    Y = project_ds(Y, config.proj_tol, config.max_sweeps).data
    spectral = state.spectral
    if config.spectral_refresh == "recompute":
        mu_min, mu_max = spectral_bounds(problem.instance, config.spectral_strategy)
        spectral = (mu_min + root.shift, mu_max + root.shift)
    log.debug("level %d: fixed facility %d -> location %d", state.level + 1, orig_r, orig_c)
    return ReductionState(state.level + 1, vec(Y), rows, cols, partial, problem, spectral, root)


def solve(inst: QapInstance, config: SolverConfig = SolverConfig(), *,
          relaxed: Optional[RelaxedProblem] = None,
          on_level: Optional[Callable[[ReductionState], None]] = None) -> AssignmentResult:
    """Run the full dimension-reduction loop and return a permutation.

    ``on_level`` is called with the state at the start of every level (before any
    step at that level), which lets tests inspect each reduced operator.
    """
    start = time.monotonic()
    deadline = None if config.max_wall_time is None else start + config.max_wall_time
    rp = relaxed if relaxed is not None else build_relaxed(inst, config.sigma, config.spectral_strategy)
    state = initial_state(rp)
    n_iter = config.first_niter
    count = 0
    steps = 0
    reductions = 0
    if on_level is not None:
        on_level(state)

    while state.size > 0:
        if deadline is not None and time.monotonic() > deadline:
            raise TimedOut(f"wall-time budget of {config.max_wall_time}s exceeded at level {state.level}",
                           state.partial_perm)
        if state.size == 1:
            state = reduce(state, config)
            reductions += 1
            break

        before = relaxed_objective(state.problem, state.x) if config.check_descent else 0.0
        state.x = projected_step(state.problem, state.x, config.proj_tol, config.max_sweeps)
        steps += 1
        if config.check_descent:
            after = relaxed_objective(state.problem, state.x)
            if after > before + 1e-9 * (1.0 + abs(before)):
                raise DescentViolation(f"level {state.level} step {steps}: {before!r} -> {after!r}")

        if count >= n_iter:
            count = 1
            state = reduce(state, config)
            reductions += 1
            if state.size > 0:
                n_iter = trigger_count(*state.spectral, config.epsilon, config.eta)
                if on_level is not None:
                    on_level(state)
        else:
            count += 1

    perm = np.array([state.partial_perm[i] for i in range(inst.n)], dtype=np.int64)
    elapsed = (time.monotonic() - start) * 1000.0
    return AssignmentResult(
        permutation=perm,
        objective=evaluate_permutation(inst, perm),
        instance=inst.name,
        reductions=reductions,
        gradient_steps=steps,
        wall_time_ms=elapsed,
        config=config.as_dict(),
    )

