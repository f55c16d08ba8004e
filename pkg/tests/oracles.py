"""Reference implementations used only by the tests.

Each one is deliberately naive (dense Kronecker matrices, enumeration,
explicit loops) and independent of the package code it checks.
"""

import itertools

import numpy as np


def vec(X):
    """Column-stacking vectorisation."""
    return np.asarray(X).reshape(-1, order="F")


def f0_kron(A, B, P):
    """||A P - P B||^2 via the n^2 x n^2 operator I kron A - B^T kron I."""
    n = A.shape[0]
    I = np.eye(n)
    K = np.kron(I, A) - np.kron(B.T, I)
    r = K @ vec(P)
    return float(r @ r)


def f1_kron(A, B, P):
    """Concave relaxation with dense Kronecker products, written from scratch."""
    n = A.shape[0]
    dA, dB = A.sum(1), B.sum(1)
    LA, LB = np.diag(dA) - A, np.diag(dB) - B
    delta = np.array([[(dB[j] - dA[i]) ** 2 for j in range(n)] for i in range(n)])
    p = vec(P)
    quad = p @ np.kron(LB, LA) @ p
    return float(-vec(delta) @ p - 2.0 * quad)


def brute_lap(cost):
    n = cost.shape[0]
    best, arg = np.inf, None
    for perm in itertools.permutations(range(n)):
        v = cost[np.arange(n), perm].sum()
        if v < best:
            best, arg = v, perm
    return best, np.array(arg)


def brute_match(A, B, C=None, alpha=0.0):
    n = A.shape[0]
    best, arg = np.inf, None
    for perm in itertools.permutations(range(n)):
        perm = np.array(perm)
        v = (1 - alpha) * np.sum((A - B[np.ix_(perm, perm)]) ** 2)
        if alpha:
            v += alpha * C[np.arange(n), perm].sum()
        if v < best - 1e-12:
            best, arg = v, perm
    return best, arg


def central_difference(f, P, h=1e-6):
    G = np.zeros_like(P)
    for idx in np.ndindex(P.shape):
        E = np.zeros_like(P)
        E[idx] = h
        G[idx] = (f(P + E) - f(P - E)) / (2 * h)
    return G


def kkt_equality_minimizer(A, B, C=None, alpha=0.0):
    """argmin (1-alpha) ||A P - P B||^2 + alpha <C, P> s.t. P 1 = 1, P^T 1 = 1 (no sign constraint).

    Dense n^2 + 2n KKT system solved by least squares.
    """
    n = A.shape[0]
    I = np.eye(n)
    K = np.kron(I, A) - np.kron(B.T, I)
    H = 2 * (1 - alpha) * K.T @ K
    ones = np.ones(n)
    rows = np.kron(ones[None, :], I)  # row sums of P (column-stacked)
    cols = np.kron(I, ones[None, :])  # column sums
    E = np.vstack([rows, cols])
    g = np.zeros(n * n) if C is None else alpha * vec(C)
    kkt = np.block([[H, E.T], [E, np.zeros((2 * n, 2 * n))]])
    rhs = np.concatenate([-g, np.ones(2 * n)])
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return sol[: n * n].reshape(n, n, order="F")


def grid_argmin(phi, steps=1000):
    ts = np.linspace(0.0, 1.0, steps + 1)
    vals = np.array([phi(t) for t in ts])
    return ts[int(np.argmin(vals))], vals.min()


def lp_optimality_gap(G, P):
    """<G, P> - min_{X doubly stochastic} <G, X>, with the LP solved by scipy's HiGHS.

    For a convex objective with gradient G at P this upper-bounds the
    suboptimality of P, and is zero exactly at the optimum.
    """
    from scipy.optimize import linprog

    n = P.shape[0]
    I = np.eye(n)
    ones = np.ones((1, n))
    A_eq = np.vstack([np.kron(I, ones), np.kron(ones, I)])  # row sums, column sums (row-major vec)
    res = linprog(G.ravel(), A_eq=A_eq, b_eq=np.ones(2 * n), bounds=(0, None), method="highs")
    assert res.status == 0
    return float(np.vdot(G, P) - res.fun)
