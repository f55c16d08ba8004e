"""Reference matchers: Umeyama's spectral method and exhaustive search."""

import itertools
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .assignment import solve_lap_min
from .errors import NumericalFailure, SizeLimit
from .path import MatchResult, as_context, finish

EXHAUSTIVE_MAX_N = 10
_BLOCK = 40320


@dataclass(frozen=True)
class SpectralDecomposition:
    eigvals: np.ndarray
    eigvecs: np.ndarray


def spectral_decomposition(A) -> SpectralDecomposition:
    """Eigenpairs of a symmetric matrix, eigenvalues descending.

    Equal eigenvalues keep the solver's original column order.
    """
    try:
        vals, vecs = np.linalg.eigh(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(-vals, kind="stable")
    return SpectralDecomposition(vals[order], vecs[:, order])


def umeyama_scores(A_G, A_H) -> np.ndarray:
    """score[i, j] = sum_k |U_G[i, k]| |U_H[j, k]|, larger means more similar."""
    U_G = spectral_decomposition(A_G).eigvecs
    U_H = spectral_decomposition(A_H).eigvecs
    return np.abs(U_G) @ np.abs(U_H).T


def umeyama_match(problem) -> MatchResult:
    started = time.perf_counter()
    ctx, n_g, n_h = as_context(problem)
    scores = umeyama_scores(ctx.A_G, ctx.A_H)
    perm, _ = solve_lap_min(-scores)
    return finish(ctx, perm, "umeyama", started, n_g, n_h)


@lru_cache(maxsize=4)
def _all_permutations(n):
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8 if n < 128 else int)
    perms.setflags(write=False)
    return perms


def exhaustive_match(problem) -> MatchResult:
    """True minimiser of (1 - alpha) F0 + alpha tr(C^T P) by enumeration.

    Ties go to the lexicographically smallest permutation.
    """
    started = time.perf_counter()
    ctx, n_g, n_h = as_context(problem)
    n = ctx.n
    if n > EXHAUSTIVE_MAX_N:
        raise SizeLimit(f"exhaustive search limited to n <= {EXHAUSTIVE_MAX_N}, got {n}")
    if n == 0:
        return finish(ctx, np.zeros(0, dtype=int), "exhaustive", started, n_g, n_h)
    perms = _all_permutations(n)
    rows = np.arange(n)
    best_val, best_idx = np.inf, -1
    for lo in range(0, len(perms), _BLOCK):
        block = perms[lo:lo + _BLOCK].astype(np.intp)
        permuted = ctx.A_H[block[:, :, None], block[:, None, :]]
        vals = np.sum((permuted - ctx.A_G) ** 2, axis=(1, 2))
        if ctx.alpha > 0:
            vals = (1.0 - ctx.alpha) * vals + ctx.alpha * ctx.cost[rows, block].sum(axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_idx = vals[k], lo + k
    perm = perms[best_idx].astype(int)
    return finish(ctx, perm, "exhaustive", started, n_g, n_h)
