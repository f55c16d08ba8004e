"""Undirected weighted graphs, Laplacians, dummy-node padding and random graphs."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .errors import GenerationFailed, InvalidArgument

_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Graph:
    """Symmetric nonnegative adjacency matrix with zero diagonal.

    The weight matrix is copied and marked read-only on construction.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidArgument(f"adjacency must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidArgument("adjacency has non-finite entries")
        if np.any(w < 0):
            raise InvalidArgument("adjacency has negative weights")
        if np.any(np.diag(w) != 0):
            raise InvalidArgument("adjacency has self-loops")
        if not np.allclose(w, w.T, rtol=0, atol=_SYMMETRY_TOL):
            raise InvalidArgument("adjacency is not symmetric")
        w = 0.5 * (w + w.T)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    def degrees(self) -> np.ndarray:
        """Weighted degrees d(i) = sum_j w_ij."""
        return self.weights.sum(axis=1)

    def edges(self):
        """Upper-triangular edge list as ``(i, j, w)`` tuples, sorted by (i, j)."""
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def permuted(self, perm) -> "Graph":
        """Graph with vertex ``i`` relabelled as ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return Graph(self.weights[np.ix_(inv, inv)])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.weights.shape == other.weights.shape and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.n, self.weights.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


def degree_matrix(g: Graph) -> np.ndarray:
    return np.diag(g.degrees())


def laplacian(g: Graph) -> np.ndarray:
    """L = D - A."""
    return np.diag(g.degrees()) - g.weights


def pad_with_dummies(g: Graph, target_n: int) -> Graph:
    """Append isolated vertices so the graph has ``target_n`` vertices."""
    if target_n < g.n:
        raise InvalidArgument(f"target_n={target_n} is smaller than graph size {g.n}")
    if target_n == g.n:
        return g
    w = np.zeros((target_n, target_n))
    w[: g.n, : g.n] = g.weights
    return Graph(w)


def from_edges(n: int, edges) -> Graph:
    w = np.zeros((n, n))
    for e in edges:
        i, j = int(e[0]), int(e[1])
        wt = float(e[2]) if len(e) > 2 else 1.0
        w[i, j] = w[j, i] = wt
    return Graph(w)


@dataclass(frozen=True)
class RandomGraphModel:
    """Degree distribution VD(k) used to draw i.i.d. vertex degrees.

    ``kind`` is one of ``"binomial"`` (param p), ``"geometric"`` (param mu)
    or ``"power"`` (param tau).
    """

    kind: str
    param: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgument("random graphs need at least 2 vertices")
        if self.kind == "binomial":
            if not 0 < self.param < 1:
                raise InvalidArgument(f"binomial p must lie in (0, 1), got {self.param}")
        elif self.kind == "geometric":
            if not self.param > 0:
                raise InvalidArgument(f"geometric mu must be positive, got {self.param}")
        elif self.kind == "power":
            if not self.param > 1:
                raise InvalidArgument(f"power-law tau must exceed 1, got {self.param}")
        else:
            raise InvalidArgument(f"unknown random graph model {self.kind!r}")

    def degree_pmf(self) -> np.ndarray:
        """Probabilities of degrees 0..n-1."""
        k = np.arange(self.n)
        if self.kind == "binomial":
            pmf = stats.binom.pmf(k, self.n - 1, self.param)
        elif self.kind == "geometric":
            pmf = np.exp(-self.param * k)
        else:
            pmf = np.zeros(self.n)
            pmf[1:] = k[1:].astype(float) ** (-self.param)
        return pmf / pmf.sum()


def _pair_degrees(d, rng, max_rejections):
    """Consume the degree sequence into a simple graph, or return None on a stall.

    Endpoints are drawn with probability proportional to their remaining
    degree (free stubs).
    """
    n = len(d)
    stubs = np.repeat(np.arange(n), d).tolist()
    adj = [set() for _ in range(n)]
    rejections = 0
    while stubs:
        x = int(rng.integers(len(stubs)))
        y = int(rng.integers(len(stubs)))
        a, b = stubs[x], stubs[y]
        if x == y or a == b or b in adj[a]:
            rejections += 1
            if rejections >= max_rejections:
                return None
            continue
        rejections = 0
        adj[a].add(b)
        adj[b].add(a)
        for k in sorted((x, y), reverse=True):
            stubs[k] = stubs[-1]
            stubs.pop()
    w = np.zeros((n, n))
    for a in range(n):
        if adj[a]:
            w[a, list(adj[a])] = 1.0
    return w


def generate_random_graph(model: RandomGraphModel, seed=None, max_attempts: int = 1000) -> Graph:
    """Unweighted graph whose degree sequence is an i.i.d. sample from ``model``.

    Odd-sum sequences are redrawn. Pair proposals that would create a self-loop
    or a duplicate edge are rejected; after n**2 consecutive rejections the whole
    sequence is redrawn.
    """
    rng = np.random.default_rng(seed)
    pmf = model.degree_pmf()
    n = model.n
    for _ in range(max_attempts):
        d = rng.choice(n, size=n, p=pmf)
        if d.sum() % 2:
            continue
        w = _pair_degrees(d, rng, max_rejections=n * n)
        if w is not None:
            return Graph(w)
    raise GenerationFailed(f"no simple graph realised after {max_attempts} degree samples for {model}")


def add_noise(g: Graph, sigma: float, seed=None) -> Graph:
    """Add floor(sigma * N_E) unit edges uniformly among absent vertex pairs."""
    if sigma < 0:
        raise InvalidArgument(f"noise level must be nonnegative, got {sigma}")
    k = int(np.floor(sigma * g.num_edges))
    if k == 0:
        return g
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(g.n, 1)
    absent = np.flatnonzero(g.weights[iu, ju] == 0)
    if len(absent) < k:
        raise GenerationFailed(f"cannot add {k} edges: only {len(absent)} absent pairs")
    pick = rng.choice(absent, size=k, replace=False)
    w = g.weights.copy()
    w[iu[pick], ju[pick]] = 1.0
    w[ju[pick], iu[pick]] = 1.0
    return Graph(w)


def random_permutation(n: int, seed=None) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n)


def equalize_sizes(g: Graph, h: Graph, cost: Optional[np.ndarray] = None):
    """Pad the smaller graph (and the cost matrix) with dummy nodes.

    Dummy rows/columns of the cost matrix are zero.
    """
    n = max(g.n, h.n)
    if cost is not None:
        cost = np.asarray(cost, dtype=float)
        if cost.shape != (g.n, h.n):
            raise InvalidArgument(f"cost matrix shape {cost.shape} does not match graphs ({g.n}, {h.n})")
        padded = np.zeros((n, n))
        padded[: g.n, : h.n] = cost
        cost = padded
    return pad_with_dummies(g, n), pad_with_dummies(h, n), cost
