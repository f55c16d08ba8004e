"""Graph matching objectives on the Birkhoff polytope and their gradients.

All quantities are computed with n x n matrix products; the n^2 x n^2
Kronecker operators of the vectorised forms are never built:

    (A^T kron B) vec(X) = vec(B X A)
    tr(X^T A X B^T)     = vec(X)^T (B kron A) vec(X)
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assignment import perm_to_matrix
from .errors import InvalidArgument, UndefinedNormalization
from .graph import Graph


def _as_matrix(a, name):
    if isinstance(a, Graph):
        return a.weights
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class ObjectiveContext:
    """Precomputed matrices for one matching problem of size n.

    ``cost`` is a node dissimilarity (smaller is better) entering the
    objective as ``alpha * sum_ij cost_ij P_ij``.

    Adjacency matrices with negative weights are accepted; their Laplacians
    are then indefinite and a ridge ``rho * (n - ||P||_F^2)`` is folded into
    the concave term so that it stays concave while its values on
    permutations are unchanged.
    """

    A_G: np.ndarray
    A_H: np.ndarray
    cost: Optional[np.ndarray] = None
    alpha: float = 0.0
    L_G: np.ndarray = field(init=False, repr=False)
    L_H: np.ndarray = field(init=False, repr=False)
    deg_G: np.ndarray = field(init=False, repr=False)
    deg_H: np.ndarray = field(init=False, repr=False)
    Delta: np.ndarray = field(init=False, repr=False)
    kappa: float = field(init=False)
    ridge: float = field(init=False)

    def __post_init__(self):
        A_G = _as_matrix(self.A_G, "A_G")
        A_H = _as_matrix(self.A_H, "A_H")
        if A_G.shape != A_H.shape:
            raise InvalidArgument(f"graph sizes differ: {A_G.shape[0]} vs {A_H.shape[0]}; pad with dummy nodes first")
        if not (np.allclose(A_G, A_G.T) and np.allclose(A_H, A_H.T)):
            raise InvalidArgument("adjacency matrices must be symmetric")
        if np.any(np.diag(A_G) != 0) or np.any(np.diag(A_H) != 0):
            raise InvalidArgument("adjacency matrices must have a zero diagonal")
        alpha = float(self.alpha)
        if not 0.0 <= alpha <= 1.0:
            raise InvalidArgument(f"alpha must lie in [0, 1], got {alpha}")
        cost = self.cost
        if cost is None:
            if alpha != 0.0:
                raise InvalidArgument("alpha > 0 requires a cost matrix")
        else:
            cost = _as_matrix(cost, "cost") if np.ndim(cost) == 2 else np.asarray(cost, dtype=float)
            if cost.shape != A_G.shape:
                raise InvalidArgument(f"cost matrix shape {cost.shape} does not match graph size {A_G.shape}")
        deg_G = A_G.sum(axis=1)
        deg_H = A_H.sum(axis=1)
        L_G = np.diag(deg_G) - A_G
        L_H = np.diag(deg_H) - A_H
        for name, value in [("A_G", A_G), ("A_H", A_H), ("cost", cost), ("alpha", alpha),
                            ("L_G", L_G), ("L_H", L_H), ("deg_G", deg_G), ("deg_H", deg_H)]:
            if isinstance(value, np.ndarray):
                value = value.copy()
                value.setflags(write=False)
            object.__setattr__(self, name, value)
        delta = (deg_H[None, :] - deg_G[:, None]) ** 2
        delta.setflags(write=False)
        object.__setattr__(self, "Delta", delta)
        object.__setattr__(self, "kappa", float(np.sum(L_G * L_G) + np.sum(L_H * L_H)))
        object.__setattr__(self, "ridge", _concavity_ridge(L_G, L_H))

    @classmethod
    def from_graphs(cls, g: Graph, h: Graph, cost=None, alpha: float = 0.0):
        return cls(g.weights, h.weights, cost, alpha)

    @property
    def n(self) -> int:
        return self.A_G.shape[0]

    @property
    def norm(self) -> float:
        """||A_G||_F^2 + ||A_H||_F^2."""
        return float(np.sum(self.A_G ** 2) + np.sum(self.A_H ** 2))

    def check(self, P):
        P = np.asarray(P, dtype=float)
        if P.shape != (self.n, self.n):
            raise InvalidArgument(f"matrix shape {P.shape} does not match problem size {self.n}")
        return P


def _concavity_ridge(L_G, L_H):
    eg = np.linalg.eigvalsh(L_G) if L_G.size else np.zeros(1)
    eh = np.linalg.eigvalsh(L_H) if L_H.size else np.zeros(1)
    products = np.outer([eg[0], eg[-1]], [eh[0], eh[-1]])
    scale = max(1.0, float(np.abs(products).max()))
    smallest = float(products.min())
    if smallest >= -1e-9 * scale:
        return 0.0
    return -2.0 * smallest


def f0(ctx: ObjectiveContext, P) -> float:
    """||A_G P - P A_H||_F^2."""
    P = ctx.check(P)
    R = ctx.A_G @ P - P @ ctx.A_H
    return float(np.sum(R * R))


def grad_f0(ctx: ObjectiveContext, P) -> np.ndarray:
    P = ctx.check(P)
    R = ctx.A_G @ P - P @ ctx.A_H
    return 2.0 * (ctx.A_G.T @ R - R @ ctx.A_H.T)


def f1(ctx: ObjectiveContext, P) -> float:
    """Concave relaxation -sum(Delta * P) - 2 tr(P^T L_G P L_H).

    Equals f0(P) - kappa on permutation matrices.
    """
    P = ctx.check(P)
    value = -np.sum(ctx.Delta * P) - 2.0 * np.sum(P * (ctx.L_G @ P @ ctx.L_H))
    if ctx.ridge:
        value -= ctx.ridge * (np.sum(P * P) - ctx.n)
    return float(value)


def grad_f1(ctx: ObjectiveContext, P) -> np.ndarray:
    P = ctx.check(P)
    g = -ctx.Delta - 2.0 * (ctx.L_G @ P @ ctx.L_H + ctx.L_G.T @ P @ ctx.L_H.T)
    if ctx.ridge:
        g = g - 2.0 * ctx.ridge * P
    return g


def _check_lambda(lam):
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgument(f"lambda must lie in [0, 1], got {lam}")


def linear_term(ctx: ObjectiveContext, P) -> float:
    if ctx.cost is None:
        return 0.0
    return float(np.sum(ctx.cost * P))


def f_lambda_alpha(ctx: ObjectiveContext, P, lam: float) -> float:
    """(1 - alpha) [(1 - lam) f0 + lam f1] + alpha tr(C^T P)."""
    _check_lambda(lam)
    P = ctx.check(P)
    value = 0.0
    if ctx.alpha < 1.0:
        quad = 0.0
        if lam < 1.0:
            quad += (1.0 - lam) * f0(ctx, P)
        if lam > 0.0:
            quad += lam * f1(ctx, P)
        value += (1.0 - ctx.alpha) * quad
    if ctx.alpha > 0.0:
        value += ctx.alpha * linear_term(ctx, P)
    return float(value)


def grad_f_lambda_alpha(ctx: ObjectiveContext, P, lam: float) -> np.ndarray:
    _check_lambda(lam)
    P = ctx.check(P)
    g = np.zeros_like(P)
    if ctx.alpha < 1.0:
        if lam < 1.0:
            g += (1.0 - ctx.alpha) * (1.0 - lam) * grad_f0(ctx, P)
        if lam > 0.0:
            g += (1.0 - ctx.alpha) * lam * grad_f1(ctx, P)
    if ctx.alpha > 0.0:
        g += ctx.alpha * ctx.cost
    return g


class PathObjective:
    """F_lambda^alpha at a fixed lambda, divided by ``scale``.

    Shares the matrix products between the convex and concave parts: with
    X = A_G P and Y = P A_H,

        L_G P L_H = D_G P D_H - X D_H - D_G Y + X A_H

    so a value-and-gradient evaluation takes five n x n multiplications.
    With ``shifted=True`` the constant ``(1 - alpha) lam kappa`` is added, which
    makes the value on permutation matrices independent of lambda.
    """

    def __init__(self, ctx: ObjectiveContext, lam: float, scale: float = 1.0, shifted: bool = False):
        _check_lambda(lam)
        self.ctx = ctx
        self.lam = lam
        self.scale = scale
        self.w0 = (1.0 - ctx.alpha) * (1.0 - lam) / scale
        self.w1 = (1.0 - ctx.alpha) * lam / scale
        self.wc = ctx.alpha / scale
        self.offset = (1.0 - ctx.alpha) * lam * ctx.kappa / scale if shifted else 0.0
        self.shifted = shifted

    def _products(self, P):
        ctx = self.ctx
        X = ctx.A_G @ P
        Y = P @ ctx.A_H
        Z = X @ ctx.A_H
        return X, Y, Z

    def _value(self, P, X, Y, Z):
        ctx = self.ctx
        v = self.offset
        if self.w0:
            R = X - Y
            v += self.w0 * np.vdot(R, R)
        if self.w1:
            dG = ctx.deg_G[:, None]
            dH = ctx.deg_H[None, :]
            LPL = dG * P * dH - X * dH - dG * Y + Z
            q = -np.vdot(ctx.Delta, P) - 2.0 * np.vdot(P, LPL)
            if ctx.ridge:
                q -= ctx.ridge * (np.vdot(P, P) - ctx.n)
            v += self.w1 * q
        if self.wc:
            v += self.wc * np.vdot(ctx.cost, P)
        return float(v)

    def _gradient(self, P, X, Y, Z):
        ctx = self.ctx
        g = np.zeros_like(P)
        if self.w0:
            # grad F0 = 2 (A_G^2 P - 2 A_G P A_H + P A_H^2)
            g += (2.0 * self.w0) * (ctx.A_G @ X - 2.0 * Z + Y @ ctx.A_H)
        if self.w1:
            dG = ctx.deg_G[:, None]
            dH = ctx.deg_H[None, :]
            LPL = dG * P * dH - X * dH - dG * Y + Z
            g -= self.w1 * (ctx.Delta + 4.0 * LPL)
            if ctx.ridge:
                g -= (2.0 * self.w1 * ctx.ridge) * P
        if self.wc:
            g += self.wc * ctx.cost
        return g

    def value(self, P) -> float:
        return self._value(P, *self._products(P))

    def gradient(self, P) -> np.ndarray:
        return self._gradient(P, *self._products(P))

    def value_and_gradient(self, P):
        prods = self._products(P)
        return self._value(P, *prods), self._gradient(P, *prods)

    def at_permutation(self, perm) -> float:
        """Value at the permutation matrix of ``perm`` in O(n^2)."""
        ctx = self.ctx
        permuted = ctx.A_H[np.ix_(perm, perm)]
        f0_val = np.sum((ctx.A_G - permuted) ** 2)
        # on permutations f1 = f0 - kappa
        v = (self.w0 + self.w1) * f0_val - self.w1 * ctx.kappa + self.offset
        if self.wc:
            v += self.wc * ctx.cost[np.arange(ctx.n), perm].sum()
        return float(v)

    __call__ = value


def f_norm(ctx: ObjectiveContext, P) -> float:
    """f0 / (||A_G||_F^2 + ||A_H||_F^2)."""
    denom = ctx.norm
    if denom == 0:
        raise UndefinedNormalization("both graphs are empty")
    return f0(ctx, P) / denom


def qap_value(A, B, perm) -> float:
    """QAPLIB objective sum_ij A_ij B_{perm(i) perm(j)}."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    perm = np.asarray(perm, dtype=int)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape or len(perm) != A.shape[0]:
        raise InvalidArgument(f"size mismatch: A {A.shape}, B {B.shape}, perm {perm.shape}")
    return float(np.sum(A * B[np.ix_(perm, perm)]))


def matching_objective(ctx: ObjectiveContext, perm) -> float:
    """(1 - alpha) f0 + alpha tr(C^T P) at a permutation."""
    P = perm_to_matrix(perm)
    return (1.0 - ctx.alpha) * f0(ctx, P) + ctx.alpha * linear_term(ctx, P)
