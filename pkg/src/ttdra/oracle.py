"""Slow, independent ground truth for tests and the ``oracle`` CLI command.

Nothing here reuses the solver's fast paths: costs are recomputed from the
definition, the Kronecker product is built explicitly and the doubly stochastic
projection is certified through a variational inequality over the vertices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import TooLargeForOracle
from .instance import QapInstance

MAX_BRUTE_FORCE_N = 10
MAX_MATERIALIZE_N = 8
MAX_QP_N = 4


@dataclass(frozen=True)
class OracleResult:
    optimum: float
    argmin: np.ndarray  # 0-indexed
    enumerated: int
    worst: float


def _costs(inst: QapInstance, perms: np.ndarray) -> np.ndarray:
    n = inst.n
    A, B = inst.flow, inst.distance
    C = inst.linear.reshape(n, n, order="F")
    rows = np.arange(n)
    quad = np.einsum("ij,kij->k", A, B[perms[:, :, None], perms[:, None, :]])
    lin = C[rows, perms].sum(axis=1)
    return quad + lin


def brute_force(inst: QapInstance, chunk: int = 20_000) -> OracleResult:
    """Enumerate all ``n!`` permutations in lexicographic order."""
    n = inst.n
    if n > MAX_BRUTE_FORCE_N:
        raise TooLargeForOracle(f"brute force is capped at n={MAX_BRUTE_FORCE_N}, got n={n}")
    best, worst = math.inf, -math.inf
    argmin = None
    count = 0
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            break
        perms = np.array(block, dtype=np.int64)
        costs = _costs(inst, perms)
        k = int(np.argmin(costs))
        if costs[k] < best:
            best, argmin = float(costs[k]), perms[k].copy()
        worst = max(worst, float(costs.max()))
        count += len(block)
    return OracleResult(best, argmin, count, worst)


def materialize_W(inst: QapInstance) -> np.ndarray:
    """Explicit ``B kron A`` (``n^2 x n^2``)."""
    n = inst.n
    if n > MAX_MATERIALIZE_N:
        raise TooLargeForOracle(f"materialization is capped at n={MAX_MATERIALIZE_N}, got n={n}")
    W = np.zeros((n * n, n * n))
    for j in range(n):
        for jp in range(n):
            W[j * n:(j + 1) * n, jp * n:(jp + 1) * n] = inst.distance[j, jp] * inst.flow
    return W


def _constraints(n: int) -> np.ndarray:
    # Row sums then column sums of the row-major flattening.
    M = np.zeros((2 * n, n * n))
    for i in range(n):
        M[i, i * n:(i + 1) * n] = 1.0
        M[n + i, i::n] = 1.0
    return M


def _solve_with_zeros(x: np.ndarray, M: np.ndarray, zero: np.ndarray) -> np.ndarray:
    """Minimize ``0.5 ||y - x||^2`` subject to ``M y = 1`` and ``y[zero] = 0``."""
    free = ~zero
    Mf = M[:, free]
    lam = np.linalg.lstsq(Mf @ Mf.T, 1.0 - Mf @ x[free], rcond=None)[0]
    y = np.zeros_like(x)
    y[free] = x[free] + Mf.T @ lam
    return y


def _is_projection(x: np.ndarray, y: np.ndarray, M: np.ndarray, n: int, tol: float) -> bool:
    # y is the projection iff it is feasible and <y - x, z - y> >= 0 for every z in
    # the polytope; a linear function is minimized at a vertex, so checking the n!
    # permutation matrices suffices.
    if np.abs(M @ y - 1.0).max() > tol or y.min() < -tol:
        return False
    G = (y - x).reshape(n, n)
    at_y = float(G.reshape(-1) @ y)
    rows = np.arange(n)
    vertex_min = min(G[rows, list(p)].sum() for p in itertools.permutations(range(n)))
    return at_y <= vertex_min + tol


def qp_project_oracle(X: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Euclidean projection onto the doubly stochastic matrices for ``n <= 4``.

    A numerical QP solve suggests which entries are zero; the closed-form
    equality-constrained solution for that pattern is accepted only after the
    optimality certificate above.  If the suggestion fails, every zero pattern is
    enumerated by increasing size.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n > MAX_QP_N:
        raise TooLargeForOracle(f"QP oracle is capped at n={MAX_QP_N}, got n={n}")
    x = X.reshape(-1)
    M = _constraints(n)
    scale = max(1.0, np.abs(x).max())
    Meq = M[:-1]  # the last column sum is implied by the others

    guess = minimize(
        lambda y: 0.5 * np.sum((y - x) ** 2),
        np.full(n * n, 1.0 / n),
        jac=lambda y: y - x,
        bounds=[(0.0, None)] * (n * n),
        constraints=[{"type": "eq", "fun": lambda y: Meq @ y - 1.0, "jac": lambda y: Meq}],
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 500},
    )
    # Zero sets made of the k smallest entries of the numerical guess, for every k.
    candidates = []
    for k in range(n * n):
        zero = np.zeros(n * n, dtype=bool)
        zero[np.argsort(guess.x, kind="stable")[:k]] = True
        candidates.append(zero)
    for zero in candidates:
        y = _solve_with_zeros(x, M, zero)
        if _is_projection(x, y, M, n, tol * scale):
            return np.maximum(y, 0.0).reshape(n, n)

    idx = np.arange(n * n)
    for k in range(n * n):
        for combo in itertools.combinations(idx, k):
            zero = np.zeros(n * n, dtype=bool)
            zero[list(combo)] = True
            y = _solve_with_zeros(x, M, zero)
            if _is_projection(x, y, M, n, tol * scale):
                return np.maximum(y, 0.0).reshape(n, n)
    raise RuntimeError("no zero pattern passed the optimality certificate")
