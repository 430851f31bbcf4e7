"""Strongly convex relaxation of the QAP over doubly stochastic matrices.

The quadratic form is symmetrized, ``W_sym = (W + W^T) / 2``, and shifted by
``shift = max(sigma/2 - mu_min, 0)`` so that the Hessian of

    f~(x) = x^T W_sym x + shift * ||x||^2 + c^T x - shift * n

is bounded below by ``sigma``.  On permutation matrices ``||x||^2 = n``, so the
constant makes ``f~`` agree with the QAP cost there, while on the rest of the
Birkhoff polytope ``||x||^2 < n`` and ``f~`` underestimates it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

from .errors import ConvexityViolation, DimensionError, SpectralFailure, StrategyTooLarge
from .instance import QapInstance
from .projection import DEFAULT_MAX_SWEEPS, DEFAULT_TOL, project_ds
from .quadratic import apply_W_sym, permutation_matrix, unvec, vec

log = logging.getLogger(__name__)

DENSE_LIMIT = 2500  # largest n^2 for which W_sym may be materialized
STRATEGIES = ("auto", "dense", "iterative", "kronecker")


def _dense_w_sym(inst: QapInstance) -> np.ndarray:
    W = np.kron(inst.distance, inst.flow)
    return 0.5 * (W + W.T)


def _dense_bounds(inst: QapInstance) -> tuple[float, float]:
    if inst.n ** 2 > DENSE_LIMIT:
        raise StrategyTooLarge(f"dense eigensolve needs n^2 <= {DENSE_LIMIT}, got n={inst.n}")
    eigs = np.linalg.eigvalsh(_dense_w_sym(inst))
    return float(eigs[0]), float(eigs[-1])


def _kronecker_bounds(inst: QapInstance) -> tuple[float, float]:
    # eig(B kron A) = {b_j * a_i}; exact only for symmetric A and B.
    if not inst.is_symmetric:
        raise ValueError("the Kronecker eigenvalue shortcut requires symmetric flow and distance")
    a = np.linalg.eigvalsh(inst.flow)
    b = np.linalg.eigvalsh(inst.distance)
    corners = np.outer([a[0], a[-1]], [b[0], b[-1]])
    return float(corners.min()), float(corners.max())


def _iterative_bounds(inst: QapInstance, rtol: float = 1e-8) -> tuple[float, float]:
    n = inst.n
    dim = n * n
    if dim <= 9:
        return _dense_bounds(inst)
    budget = 10 * dim
    calls = 0

    def matvec(v):
        nonlocal calls
        calls += 1
        if calls > budget:
            raise SpectralFailure(f"iterative eigensolver exceeded {budget} operator applications")
        return apply_W_sym(inst, np.ravel(v))

    op = LinearOperator((dim, dim), matvec=matvec, dtype=float)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(dim)
    ncv = min(dim, 40)
    out = []
    for which in ("SA", "LA"):
        try:
            val = eigsh(op, k=1, which=which, tol=rtol, ncv=ncv, v0=v0, maxiter=budget,
                        return_eigenvectors=False)
        except (ArpackNoConvergence, ArpackError) as err:
            raise SpectralFailure(f"Lanczos did not converge for {which} eigenvalue: {err}") from err
        out.append(float(val[0]))
    log.debug("iterative spectral bounds for n=%d used %d applications", n, calls)
    return out[0], out[1]


def spectral_bounds(inst: QapInstance, strategy: str = "auto") -> tuple[float, float]:
    """Extremal eigenvalues ``(mu_min, mu_max)`` of ``W_sym``.

    ``auto`` uses the Kronecker shortcut for symmetric data, a dense eigensolve
    while ``n^2 <= 2500`` and implicitly restarted Lanczos beyond that.
    """
    if strategy == "auto":
        if inst.is_symmetric:
            strategy = "kronecker"
        elif inst.n ** 2 <= DENSE_LIMIT:
            strategy = "dense"
        else:
            strategy = "iterative"
    if strategy == "dense":
        return _dense_bounds(inst)
    if strategy == "iterative":
        return _iterative_bounds(inst)
    if strategy == "kronecker":
        return _kronecker_bounds(inst)
    raise ValueError(f"unknown spectral strategy {strategy!r}; choose from {STRATEGIES}")


@dataclass(frozen=True)
class RelaxedProblem:
    instance: QapInstance
    sigma: float
    mu_min: float
    mu_max: float
    shift: float
    constant: float

    @property
    def n(self) -> int:
        return self.instance.n

    @property
    def tilde_bounds(self) -> tuple[float, float]:
        """Extremal eigenvalues of ``W~ = W_sym + shift * I``."""
        return self.mu_min + self.shift, self.mu_max + self.shift

    def apply_hessian(self, v: np.ndarray) -> np.ndarray:
        return 2.0 * (apply_W_sym(self.instance, v) + self.shift * v)


def build_relaxed(inst: QapInstance, sigma: float, strategy: str = "auto",
                  bounds: Optional[tuple[float, float]] = None) -> RelaxedProblem:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    mu_min, mu_max = bounds if bounds is not None else spectral_bounds(inst, strategy)
    shift = max(sigma / 2.0 - mu_min, 0.0)
    return RelaxedProblem(inst, float(sigma), mu_min, mu_max, shift, -shift * inst.n)


def _check_len(rp: RelaxedProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (rp.n ** 2,):
        raise DimensionError(f"expected a vector of length {rp.n ** 2}, got shape {x.shape}")
    return x


def relaxed_objective(rp: RelaxedProblem, x) -> float:
    x = _check_len(rp, x)
    return float(x @ apply_W_sym(rp.instance, x) + rp.shift * (x @ x) + rp.instance.linear @ x + rp.constant)


def relaxed_gradient(rp: RelaxedProblem, x) -> np.ndarray:
    x = _check_len(rp, x)
    return 2.0 * (apply_W_sym(rp.instance, x) + rp.shift * x) + rp.instance.linear


def step_size(rp: RelaxedProblem, g) -> float:
    """Exact line-search step ``g^T g / g^T H g`` along ``-g`` with ``H = 2 (W_sym + shift I)``."""
    g = _check_len(rp, g)
    gg = float(g @ g)
    if gg == 0.0:
        raise ValueError("step size is undefined for a zero gradient")
    curvature = float(g @ rp.apply_hessian(g))
    if curvature <= 0.0:
        raise ConvexityViolation(f"non-positive curvature {curvature:.3e} along the gradient")
    return gg / curvature


def projected_step(rp: RelaxedProblem, x: np.ndarray, proj_tol: float = DEFAULT_TOL,
                   max_sweeps: int = DEFAULT_MAX_SWEEPS) -> np.ndarray:
    """One projected steepest-descent step from ``x``."""
    g = relaxed_gradient(rp, x)
    if not np.any(g):
        return x.copy()
    y = x - step_size(rp, g) * g
    return vec(project_ds(unvec(y, rp.n), proj_tol, max_sweeps).data)


@dataclass
class RelaxationResult:
    x: np.ndarray
    bound: float
    converged: bool
    iterations: int
    certified_optimal: bool = False
    permutation: Optional[np.ndarray] = None


def nearest_permutation(X: np.ndarray, atol: float = 1e-6) -> Optional[np.ndarray]:
    """The permutation whose matrix is within ``atol`` (entrywise) of ``X``, if any."""
    perm = np.argmax(X, axis=1)
    if len(set(perm.tolist())) != X.shape[0]:
        return None
    if np.abs(X - permutation_matrix(perm)).max() > atol:
        return None
    return perm


def _first_order_optimal(rp: RelaxedProblem, perm: np.ndarray, rtol: float = 1e-9) -> bool:
    # P minimizes the convex f~ over the polytope iff it minimizes the linearization
    # <grad f~(P), Y> over its vertices, i.e. iff P solves that assignment problem.
    G = unvec(relaxed_gradient(rp, vec(permutation_matrix(perm))), rp.n)
    rows, cols = linear_sum_assignment(G)
    best = G[rows, cols].sum()
    at_p = G[np.arange(rp.n), perm].sum()
    return bool(at_p <= best + rtol * (1.0 + np.abs(G).sum()))


def solve_relaxation(rp: RelaxedProblem, tol: float = 1e-10, max_iters: int = 10_000,
                     proj_tol: float = DEFAULT_TOL) -> RelaxationResult:
    """Projected steepest descent on ``f~`` over the Birkhoff polytope, no reduction.

    ``bound`` is ``f~`` at the final iterate.  When the iterate is within 1e-6 of
    a permutation matrix that also passes a first-order optimality check, the
    permutation is a global optimum of the QAP and ``certified_optimal`` is set.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = rp.n
    x = vec(np.full((n, n), 1.0 / n))
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        x_next = projected_step(rp, x, proj_tol)
        moved = np.linalg.norm(x_next - x)
        small = moved <= tol * (1.0 + np.linalg.norm(x))
        x = x_next
        if small:
            converged = True
            break
    if n == 1:
        converged = True
    result = RelaxationResult(x, relaxed_objective(rp, x), converged, it)
    perm = nearest_permutation(unvec(x, n))
    if converged and perm is not None and _first_order_optimal(rp, perm):
        result.certified_optimal = True
        result.permutation = perm
    return result
