"""Frank-Wolfe (conditional gradient) minimisation over doubly stochastic matrices."""

import logging
from dataclasses import dataclass

import numpy as np

from .assignment import lap_argmin, perm_to_matrix, sinkhorn_sweep
from .errors import InvalidArgument, NumericalFailure

log = logging.getLogger(__name__)

RENORMALIZE_EVERY = 50


@dataclass(frozen=True)
class FwConfig:
    eps_f: float = 1e-6
    eps_p: float = 1e-6
    max_iters: int = 5000

    def __post_init__(self):
        if not (self.eps_f > 0 and self.eps_p > 0 and self.max_iters > 0):
            raise InvalidArgument(f"Frank-Wolfe tolerances and iteration cap must be positive: {self}")


@dataclass
class FwResult:
    minimizer: np.ndarray
    value: float
    iters: int
    converged: bool
    gap: float
    """Frank-Wolfe duality gap <grad F(P), P - S> at the last linearisation."""


def line_search_quadratic(a: float, b: float, c: float = 0.0) -> float:
    """Exact minimiser over [0, 1] of phi(t) = a t^2 + b t + c."""
    if a > 0:
        return float(min(1.0, max(0.0, -b / (2.0 * a))))
    # concave or linear: the minimum sits at an endpoint
    return 1.0 if a + b < 0 else 0.0


def fw_minimize(objective, gradient, start, cfg: FwConfig = FwConfig(), lap_method: str = "scipy",
                vertex_value=None) -> FwResult:
    """Minimise a quadratic ``objective`` over the Birkhoff polytope.

    Each iteration linearises at the current point, solves the linear
    assignment problem for the steepest vertex S and moves to the exact
    minimiser of the objective on the segment [P, S]. Stops once both the
    decrease of the objective and the Frobenius step length fall below the
    configured tolerances, or when the linearisation certifies optimality.

    ``vertex_value(perm)``, when given, must equal ``objective`` at the
    permutation matrix of ``perm``; it lets callers evaluate vertices cheaply.
    """
    P = np.array(start, dtype=float, copy=True)
    F = float(objective(P))
    if not np.isfinite(F):
        raise NumericalFailure("objective is not finite at the starting point")
    gap = np.inf
    converged = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        G = gradient(P)
        if not np.all(np.isfinite(G)):
            raise NumericalFailure(f"non-finite gradient at iteration {it}")
        perm = lap_argmin(G, lap_method)
        S = perm_to_matrix(perm)
        D = S - P
        b = float(np.vdot(G, D))
        gap = -b
        if b >= 0:
            converged = True
            break
        FS = float(vertex_value(perm) if vertex_value is not None else objective(S))
        if not np.isfinite(FS):
            raise NumericalFailure(f"non-finite objective at iteration {it}")
        a = FS - F - b
        t = line_search_quadratic(a, b)
        if t == 0.0:
            converged = True
            break
        if t == 1.0:
            P = S
            F_new = FS
        else:
            P = P + t * D
            F_new = F + t * (b + a * t)
        if it % RENORMALIZE_EVERY == 0:
            P = sinkhorn_sweep(P)
            F_new = float(objective(P))
        step = t * float(np.sqrt(np.vdot(D, D)))
        decrease = F - F_new
        F = F_new
        if abs(decrease) < cfg.eps_f and step < cfg.eps_p:
            converged = True
            break
    F = float(objective(P))
    log.debug("frank-wolfe: %d iterations, value %.6g, gap %.3g", it, F, gap)
    return FwResult(P, F, it, converged, float(gap))
