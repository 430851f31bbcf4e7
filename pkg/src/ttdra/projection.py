"""Projection onto doubly stochastic matrices by alternating directional projection.

Each sweep projects onto the affine set ``{Y : Y 1 = 1, 1^T Y = 1^T}`` in closed
form, then clips negative entries.  The affine step solves the normal equations
through the pseudoinverse of ``A A^T``, which is singular (rank ``2n - 1``)
because row and column constraints share the total mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ProjectionNotConverged

DEFAULT_TOL = 1e-9
DEFAULT_MAX_SWEEPS = 10_000


class AffineOperator:
    """Matrix-free ``A = [I kron 1^T; 1^T kron I]`` acting on ``n x n`` matrices.

    ``apply`` returns row sums followed by column sums.  ``gram_pinv`` applies
    ``(A A^T)^+`` using the eigenstructure of ``A A^T = [[n I, J], [J, n I]]``:
    eigenvalue ``n`` on vectors orthogonal to ones in each block, ``2n`` on
    ``(1; 1)`` and ``0`` on ``(1; -1)``.
    """

    def __init__(self, n: int):
        self.n = n

    def apply(self, X: np.ndarray) -> np.ndarray:
        return np.concatenate([X.sum(axis=1), X.sum(axis=0)])

    def apply_T(self, lam: np.ndarray) -> np.ndarray:
        a, b = lam[: self.n], lam[self.n:]
        return a[:, None] + b[None, :]

    def gram_pinv(self, r: np.ndarray) -> np.ndarray:
        n = self.n
        p, q = r[:n], r[n:]
        pm, qm = p.mean(), q.mean()
        common = (pm + qm) / (4.0 * n)
        return np.concatenate([(p - pm) / n + common, (q - qm) / n + common])

    def to_dense(self) -> np.ndarray:
        """Explicit ``2n x n^2`` matrix in the row-major flattening of ``X`` (for tests)."""
        n = self.n
        eye, ones = np.eye(n), np.ones((1, n))
        return np.vstack([np.kron(eye, ones), np.kron(ones, eye)])


def affine_project(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise NumericError("cannot project a matrix with non-finite entries")
    op = AffineOperator(X.shape[0])
    lam = op.gram_pinv(1.0 - op.apply(X))
    return X + op.apply_T(lam)


def nonneg_project(X: np.ndarray) -> np.ndarray:
    return np.maximum(X, 0.0)


def constraint_violation(X: np.ndarray) -> float:
    """Largest absolute deviation of a row or column sum from one."""
    return float(max(np.abs(X.sum(axis=1) - 1.0).max(), np.abs(X.sum(axis=0) - 1.0).max()))


def is_doubly_stochastic(X, tol: float = DEFAULT_TOL) -> bool:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.size == 0:
        return False
    if not np.all(np.isfinite(X)):
        return False
    return bool(X.min() >= -tol and constraint_violation(X) <= tol)


@dataclass(frozen=True)
class DoublyStochasticMatrix:
    data: np.ndarray
    tol: float
    sweeps: int = 0

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def violation(self) -> float:
        return constraint_violation(self.data)


def project_ds(X, tol: float = DEFAULT_TOL, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> DoublyStochasticMatrix:
    """Alternate affine and nonnegative projections until ``X`` certifies as doubly stochastic.

    The check runs after the clipping step, so the returned matrix is exactly
    nonnegative.  This converges to a point of the intersection, which need not be
    the Euclidean-nearest one.
    """
    if tol <= 0 or max_sweeps < 1:
        raise ValueError("tol must be positive and max_sweeps at least 1")
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    for sweep in range(1, max_sweeps + 1):
        X = nonneg_project(affine_project(X))
        if constraint_violation(X) <= tol:
            return DoublyStochasticMatrix(X, tol, sweep)
    violation = constraint_violation(X)
    raise ProjectionNotConverged(
        f"no doubly stochastic certificate after {max_sweeps} sweeps (violation {violation:.3e})",
        iterate=X,
        violation=violation,
    )
