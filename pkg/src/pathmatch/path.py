"""Convex-concave path following for labeled weighted graph matching.

The solver minimises the convex relaxation F0 over doubly stochastic
matrices, then tracks a local minimiser of

    F_lambda = (1 - lambda) F0 + lambda F1

while lambda goes from 0 to 1. F1 is concave and agrees with F0 - kappa on
permutation matrices, so the end point is (up to FW tolerance) a vertex of the
Birkhoff polytope. A linear node-cost term alpha * tr(C^T P) is carried along
unchanged.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional

import numpy as np

from . import objectives as obj
from .assignment import is_doubly_stochastic, perm_to_matrix, project_to_permutation, uniform
from .errors import InvalidArgument, SpectralDegeneracy
from .frank_wolfe import FwConfig, fw_minimize
from .graph import Graph, equalize_sizes

log = logging.getLogger(__name__)

CRITERIA = ("value-at-point", "tracked-minimum")


@dataclass(frozen=True)
class PathConfig:
    """Continuation settings.

    ``m_ratio`` relaxes the lambda-step tolerances relative to the
    Frank-Wolfe ones: eps_lambda = m_ratio * eps_FW for both the value and
    the argument test.
    """

    d_lambda_min: float = 1e-5
    m_ratio: float = 10.0
    fw: FwConfig = FwConfig(eps_f=1e-4, eps_p=1e-2, max_iters=5000)
    use_newton_init: bool = True
    criterion: str = "tracked-minimum"
    delta_spec: float = 1e-8
    normalize: bool = True
    lap_method: str = "scipy"

    def __post_init__(self):
        if not 0 < self.d_lambda_min <= 1:
            raise InvalidArgument(f"d_lambda_min must lie in (0, 1], got {self.d_lambda_min}")
        if self.m_ratio < 1:
            raise InvalidArgument(f"M ratio must be >= 1, got {self.m_ratio}")
        if self.criterion not in CRITERIA:
            raise InvalidArgument(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")

    def as_dict(self):
        return {
            "d_lambda_min": self.d_lambda_min,
            "m_ratio": self.m_ratio,
            "eps_f": self.fw.eps_f,
            "eps_p": self.fw.eps_p,
            "max_iters": self.fw.max_iters,
            "use_newton_init": self.use_newton_init,
            "criterion": self.criterion,
            "normalize": self.normalize,
        }


@dataclass(frozen=True)
class MatchProblem:
    g: Graph
    h: Graph
    cost: Optional[np.ndarray] = None
    alpha: float = 0.0

    def padded(self):
        """Equal-size graphs and cost matrix (dummy nodes appended)."""
        return equalize_sizes(self.g, self.h, self.cost)

    def context(self) -> obj.ObjectiveContext:
        g, h, cost = self.padded()
        return obj.ObjectiveContext(g.weights, h.weights, cost, self.alpha)


class TraceStep(NamedTuple):
    lam: float
    value: float
    fw_iters: int
    within_tolerance: bool


@dataclass
class MatchResult:
    permutation: np.ndarray
    f0_value: float
    f_norm_value: float
    qap_value: float
    objective_value: float
    solver: str
    lambda_trace: List[TraceStep] = field(default_factory=list)
    wall_time: float = 0.0
    n_g: Optional[int] = None
    n_h: Optional[int] = None
    extra: dict = field(default_factory=dict)

    @property
    def half_f0(self) -> float:
        """Mismatched undirected edge count for 0/1 graphs."""
        return 0.5 * self.f0_value

    def dummy_flags(self):
        """Per padded vertex of G: True where either side of the pair is a dummy node."""
        n = len(self.permutation)
        n_g = n if self.n_g is None else self.n_g
        n_h = n if self.n_h is None else self.n_h
        return [(i >= n_g) or (int(j) >= n_h) for i, j in enumerate(self.permutation)]


def as_context(problem):
    """``(context, n_g, n_h)`` for a :class:`MatchProblem` or a ready :class:`ObjectiveContext`."""
    if isinstance(problem, obj.ObjectiveContext):
        return problem, problem.n, problem.n
    return problem.context(), problem.g.n, problem.h.n


def finish(ctx: obj.ObjectiveContext, perm, solver, started, n_g=None, n_h=None, trace=None, extra=None) -> MatchResult:
    perm = np.asarray(perm, dtype=int)
    P = perm_to_matrix(perm)
    f0_value = obj.f0(ctx, P)
    f_norm_value = f0_value / ctx.norm if ctx.norm > 0 else 0.0
    return MatchResult(
        permutation=perm,
        f0_value=f0_value,
        f_norm_value=f_norm_value,
        qap_value=obj.qap_value(ctx.A_G, ctx.A_H, perm),
        objective_value=obj.matching_objective(ctx, perm),
        solver=solver,
        lambda_trace=list(trace or []),
        wall_time=time.perf_counter() - started,
        n_g=n_g,
        n_h=n_h,
        extra=dict(extra or {}),
    )


def newton_init(ctx: obj.ObjectiveContext, delta_spec: float = 1e-8) -> np.ndarray:
    """Minimiser of the convex objective under the row/column-sum constraints only.

    Solves the equality-constrained KKT system in the joint eigenbasis of
    A_G and A_H, where the Hessian Q = (I kron A_G - A_H kron I)^2 is diagonal
    with entries (lambda_G(i) - lambda_H(j))^2. The 2n x 2n Schur complement
    B Q^-1 B^T is assembled in closed form, so the cost is O(n^3). The result
    may have negative entries; raises :class:`SpectralDegeneracy` when the
    two spectra share an eigenvalue (Q singular).
    """
    if ctx.alpha >= 1.0:
        raise SpectralDegeneracy("purely linear objective has no quadratic part")
    n = ctx.n
    ev_g, U_g = np.linalg.eigh(ctx.A_G)
    ev_h, U_h = np.linalg.eigh(ctx.A_H)
    diff = ev_g[:, None] - ev_h[None, :]
    if np.min(np.abs(diff)) < delta_spec:
        raise SpectralDegeneracy(f"spectra of A_G and A_H share an eigenvalue (gap {np.min(np.abs(diff)):.3g})")
    W = diff ** -2.0

    def q_inv(X):
        return U_g @ (W * (U_g.T @ X @ U_h)) @ U_h.T

    ones = np.ones(n)
    g = U_g.T @ ones
    h = U_h.T @ ones
    M = np.empty((2 * n, 2 * n))
    M[:n, :n] = (U_g * (W @ (h * h))) @ U_g.T
    M[:n, n:] = (U_g * g) @ (W * h) @ U_h.T
    M[n:, :n] = M[:n, n:].T
    M[n:, n:] = (U_h * (W.T @ (g * g))) @ U_h.T

    rhs = np.ones(2 * n)
    P_lin = np.zeros((n, n))
    if ctx.alpha > 0:
        P_lin = -ctx.alpha / (2.0 * (1.0 - ctx.alpha)) * q_inv(ctx.cost)
        rhs -= np.concatenate([P_lin.sum(axis=1), P_lin.sum(axis=0)])
    # B Q^-1 B^T has the null vector [1; -1]; rhs is orthogonal to it
    nu = np.linalg.lstsq(M, rhs, rcond=None)[0]
    P = q_inv(nu[:n, None] + nu[None, n:]) + P_lin
    residual = max(np.abs(P.sum(axis=1) - 1).max(), np.abs(P.sum(axis=0) - 1).max())
    if not np.isfinite(residual) or residual > 1e-6:
        raise SpectralDegeneracy(f"ill-conditioned KKT system (constraint residual {residual:.3g})")
    return P


def _clip_to_polytope(P0, P_kkt):
    """Last point of the segment P0 -> P_kkt that stays nonnegative."""
    neg = P_kkt < 0
    if not neg.any():
        return P_kkt, 1.0
    t = float(np.min(P0[neg] / (P0[neg] - P_kkt[neg])))
    X = P0 + t * (P_kkt - P0)
    return np.maximum(X, 0.0), t


def _scale(ctx, cfg):
    if not cfg.normalize:
        return 1.0
    s = (1.0 - ctx.alpha) * ctx.norm
    if ctx.alpha > 0:
        s += ctx.alpha * float(np.abs(ctx.cost).sum()) / ctx.n
    return s if s > 0 else 1.0


def _convex_stage(ctx, cfg, scale):
    """Global minimiser of (1-alpha) F0 + alpha tr(C^T P) over the polytope."""
    n = ctx.n
    start = uniform(n)
    info = {"newton": "off"}
    if cfg.use_newton_init and n > 1:
        try:
            P_kkt = newton_init(ctx, cfg.delta_spec)
        except SpectralDegeneracy as exc:
            info["newton"] = "degenerate"
            log.debug("newton step skipped: %s", exc)
        else:
            start, t = _clip_to_polytope(start, P_kkt)
            info["newton"] = "interior" if t == 1.0 else "clipped"
    f = obj.PathObjective(ctx, 0.0, scale)
    res = fw_minimize(f.value, f.gradient, start, cfg.fw, cfg.lap_method, f.at_permutation)
    info["stage0_gap"] = res.gap
    info["stage0_iters"] = res.iters
    return res, info


def path_match(problem, cfg: PathConfig = PathConfig()) -> MatchResult:
    """Graph matching by following minimisers of F_lambda from lambda=0 to 1."""
    started = time.perf_counter()
    ctx, n_g, n_h = as_context(problem)
    n = ctx.n
    if n <= 1:
        return finish(ctx, np.zeros(n, dtype=int), "path", started, n_g, n_h)
    scale = _scale(ctx, cfg)
    res, info = _convex_stage(ctx, cfg, scale)
    P = res.minimizer
    trace = [TraceStep(0.0, obj.f_lambda_alpha(ctx, P, 0.0), res.iters, True)]

    eps_f = cfg.m_ratio * cfg.fw.eps_f
    eps_p = cfg.m_ratio * cfg.fw.eps_p
    lam = 0.0
    dl = cfg.d_lambda_min
    f_cur = obj.PathObjective(ctx, lam, scale, shifted=True).value(P)
    fw_runs = 1
    while lam < 1.0:
        if cfg.criterion == "value-at-point":
            # F_{lam+d}(P) - F_lam(P) is linear in d for fixed P
            slope = abs(obj.PathObjective(ctx, 1.0, scale, shifted=True).value(P)
                        - obj.PathObjective(ctx, 0.0, scale).value(P))
            if slope * dl <= eps_f:
                while slope * 2 * dl <= eps_f and lam + dl < 1.0:
                    dl *= 2
            else:
                while slope * dl > eps_f and dl > cfg.d_lambda_min:
                    dl = max(dl / 2, cfg.d_lambda_min)
            lam_new = min(1.0, lam + dl)
            f_new = obj.PathObjective(ctx, lam_new, scale, shifted=True)
            r = fw_minimize(f_new.value, f_new.gradient, P, cfg.fw, cfg.lap_method, f_new.at_permutation)
            fw_runs += 1
            ok = slope * (lam_new - lam) <= eps_f
        else:
            lam_new = min(1.0, lam + dl)
            f_new = obj.PathObjective(ctx, lam_new, scale, shifted=True)
            r = fw_minimize(f_new.value, f_new.gradient, P, cfg.fw, cfg.lap_method, f_new.at_permutation)
            fw_runs += 1
            step = float(np.linalg.norm(r.minimizer - P))
            ok = abs(r.value - f_cur) < eps_f and step < eps_p
            if not ok and dl > cfg.d_lambda_min:
                dl = max(dl / 2, cfg.d_lambda_min)
                continue
            if ok:
                dl *= 2
        lam = lam_new
        P = r.minimizer
        f_cur = r.value
        trace.append(TraceStep(lam, obj.f_lambda_alpha(ctx, P, lam), r.iters, ok))

    perm = project_to_permutation(P, cfg.lap_method)
    info["fw_runs"] = fw_runs
    info["final_vertex_distance"] = float(np.linalg.norm(P - perm_to_matrix(perm)))
    return finish(ctx, perm, "path", started, n_g, n_h, trace, info)


def qcv_match(problem, cfg: PathConfig = PathConfig()) -> MatchResult:
    """Convex relaxation minimiser projected onto the permutations."""
    started = time.perf_counter()
    ctx, n_g, n_h = as_context(problem)
    n = ctx.n
    if n <= 1:
        return finish(ctx, np.zeros(n, dtype=int), "qcv", started, n_g, n_h)
    res, info = _convex_stage(ctx, cfg, _scale(ctx, cfg))
    trace = [TraceStep(0.0, obj.f_lambda_alpha(ctx, res.minimizer, 0.0), res.iters, True)]
    perm = project_to_permutation(res.minimizer, cfg.lap_method)
    return finish(ctx, perm, "qcv", started, n_g, n_h, trace, info)


def convex_minimizer(problem: MatchProblem, cfg: PathConfig = PathConfig()):
    """The lambda=0 stage alone: (doubly stochastic minimiser, FwResult)."""
    ctx = as_context(problem)[0]
    res, _ = _convex_stage(ctx, cfg, _scale(ctx, cfg))
    assert is_doubly_stochastic(res.minimizer, 1e-8)
    return res.minimizer, res


def with_tolerances(cfg: PathConfig, eps=None, m_ratio=None, d_lambda_min=None, criterion=None) -> PathConfig:
    fw = cfg.fw if eps is None else replace(cfg.fw, eps_f=eps, eps_p=eps)
    return replace(
        cfg,
        fw=fw,
        m_ratio=cfg.m_ratio if m_ratio is None else m_ratio,
        d_lambda_min=cfg.d_lambda_min if d_lambda_min is None else d_lambda_min,
        criterion=cfg.criterion if criterion is None else criterion,
    )
