"""Linear assignment and projection onto permutation matrices.

A permutation is stored as an integer array ``perm`` with ``perm[i] = j``
meaning vertex ``i`` of G is matched to vertex ``j`` of H; its matrix form
has ``P[i, perm[i]] = 1``.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgument

DS_TOL = 1e-8


def perm_to_matrix(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=int)
    n = len(perm)
    P = np.zeros((n, n))
    P[np.arange(n), perm] = 1.0
    return P


def matrix_to_perm(P) -> np.ndarray:
    """Inverse of :func:`perm_to_matrix`; ``P`` must be a 0/1 permutation matrix."""
    P = np.asarray(P)
    n = P.shape[0]
    if P.shape != (n, n) or not np.all((P == 0) | (P == 1)):
        raise InvalidArgument("not a 0/1 square matrix")
    if not (np.all(P.sum(axis=0) == 1) and np.all(P.sum(axis=1) == 1)):
        raise InvalidArgument("not a permutation matrix")
    return np.argmax(P, axis=1)


def is_permutation(perm) -> bool:
    perm = np.asarray(perm)
    return perm.ndim == 1 and np.array_equal(np.sort(perm), np.arange(len(perm)))


def is_doubly_stochastic(X, tol: float = DS_TOL) -> bool:
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        return False
    return bool(
        X.min(initial=0.0) >= -tol
        and np.all(np.abs(X.sum(axis=0) - 1) <= tol)
        and np.all(np.abs(X.sum(axis=1) - 1) <= tol)
    )


def uniform(n: int) -> np.ndarray:
    """Barycentre of the Birkhoff polytope, (1/n) 11^T."""
    return np.full((n, n), 1.0 / n)


def sinkhorn_sweep(X) -> np.ndarray:
    """One row-then-column balancing pass; clips tiny negative entries first."""
    X = np.maximum(X, 0.0)
    X = X / X.sum(axis=1, keepdims=True)
    return X / X.sum(axis=0, keepdims=True)


def hungarian(cost) -> np.ndarray:
    """Shortest augmenting path Hungarian method with row/column potentials, O(n^3).

    Rows are inserted in index order and ties in the Dijkstra-like column
    selection go to the lowest column index, so the output is a deterministic
    function of the input.
    """
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    inf = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # owner[j]: 1-based row assigned to column j; column 0 is a sentinel
    owner = np.zeros(n + 1, dtype=int)
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(n + 1, inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            reduced = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    perm = np.empty(n, dtype=int)
    perm[owner[1:] - 1] = np.arange(n)
    return perm


def solve_lap_min(cost, method: str = "scipy"):
    """Minimum-cost perfect assignment.

    Returns ``(perm, total)`` with ``total = sum_i cost[i, perm[i]]``.
    ``method`` selects scipy's LAPJV-style solver (default) or the
    in-package :func:`hungarian`.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise InvalidArgument(f"cost matrix must be square, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise InvalidArgument("cost matrix has non-finite entries")
    n = cost.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int), 0.0
    if method == "scipy":
        _, perm = linear_sum_assignment(cost)
    elif method == "hungarian":
        perm = hungarian(cost)
    else:
        raise InvalidArgument(f"unknown assignment method {method!r}")
    perm = np.asarray(perm, dtype=int)
    return perm, float(cost[np.arange(n), perm].sum())


def lap_argmin(cost, method: str = "scipy") -> np.ndarray:
    """Unchecked :func:`solve_lap_min` for hot loops; returns only the permutation."""
    if method == "scipy":
        return linear_sum_assignment(cost)[1]
    return hungarian(cost)


def project_to_permutation(X, method: str = "scipy") -> np.ndarray:
    """argmax_P tr(X^T P), i.e. the permutation closest to X in Frobenius norm."""
    perm, _ = solve_lap_min(-np.asarray(X, dtype=float), method=method)
    return perm
