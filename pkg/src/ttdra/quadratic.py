"""QAP objective and the matrix-free Kronecker operator ``W = B kron A``.

``vec`` is column-major throughout: entry ``(i, j)`` of ``X`` sits at position
``j*n + i`` of ``vec(X)``.  Under that convention

    (B kron A) vec(X) = vec(A X B^T)

and ``vec(X)^T W vec(X) = sum_ij A_ij B_{p(i) p(j)}`` for the permutation matrix
``X[i, p(i)] = 1``, which is the QAPLIB cost for symmetric and asymmetric data
alike.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .instance import QapInstance, check_permutation


def vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X, dtype=float).reshape(-1, order="F")


def unvec(x: np.ndarray, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n is None:
        n = int(round(np.sqrt(x.size)))
    if x.ndim != 1 or x.size != n * n:
        raise DimensionError(f"expected a vector of length {n * n}, got shape {x.shape}")
    return x.reshape(n, n, order="F")


def permutation_matrix(perm) -> np.ndarray:
    perm = check_permutation(perm)
    X = np.zeros((perm.size, perm.size))
    X[np.arange(perm.size), perm] = 1.0
    return X


def evaluate_permutation(inst: QapInstance, perm) -> float:
    """QAPLIB cost ``sum_ij A_ij B_{p(i)p(j)} + sum_i c[vec index of (i, p(i))]``."""
    perm = check_permutation(perm, inst.n)
    quad = np.sum(inst.flow * inst.distance[np.ix_(perm, perm)])
    lin = np.sum(inst.linear[perm * inst.n + np.arange(inst.n)])
    return float(quad + lin)


def _as_matrix(inst: QapInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n * inst.n,):
        raise DimensionError(f"expected a vector of length {inst.n ** 2}, got shape {x.shape}")
    return x.reshape(inst.n, inst.n, order="F")


def apply_W(inst: QapInstance, x) -> np.ndarray:
    """``(B kron A) x`` as ``vec(A X B^T)``; O(n^3) work, no n^2 x n^2 storage."""
    X = _as_matrix(inst, x)
    return vec(inst.flow @ X @ inst.distance.T)


def apply_W_sym(inst: QapInstance, x) -> np.ndarray:
    """``((W + W^T) / 2) x``."""
    X = _as_matrix(inst, x)
    A, B = inst.flow, inst.distance
    return vec(0.5 * (A @ X @ B.T + A.T @ X @ B))


def objective_vec(inst: QapInstance, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x @ apply_W(inst, x) + inst.linear @ x)
