"""QAPLIB instances and seeded synthetic matching experiments."""

import csv
import io as _io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from . import objectives as obj
from .baselines import exhaustive_match, umeyama_match
from .errors import InvalidArgument, ParseError, PathMatchError, UnsupportedInstance
from .graph import RandomGraphModel, add_noise, generate_random_graph, random_permutation
from .path import MatchProblem, PathConfig, path_match, qcv_match

log = logging.getLogger(__name__)

SOLVERS = {
    "path": path_match,
    "qcv": qcv_match,
    "umeyama": lambda problem, cfg: umeyama_match(problem),
    "exhaustive": lambda problem, cfg: exhaustive_match(problem),
}

EXPERIMENTS = ("noise-curve", "density-curve", "timing-curve", "qaplib-table", "single-match")

CSV_COLUMNS = ("experiment", "model", "n", "sigma", "solver", "sample_idx",
               "f0", "half_f0", "f_norm", "qap_value", "wall_ms", "seed")


def solve(problem: MatchProblem, solver: str, cfg: PathConfig = PathConfig()):
    try:
        fn = SOLVERS[solver]
    except KeyError:
        raise InvalidArgument(f"unknown solver {solver!r}; choose from {sorted(SOLVERS)}") from None
    return fn(problem, cfg)


# ---------------------------------------------------------------- QAPLIB

@dataclass(frozen=True)
class PublishedRow:
    """Published QAPLIB results: best known value and four solvers."""

    min: int
    path: int
    qpb: int
    grad: int
    umeyama: int


PUBLISHED = {
    "chr12c": PublishedRow(11156, 18048, 20306, 19014, 40370),
    "chr15a": PublishedRow(9896, 19086, 26132, 30370, 60986),
    "chr15c": PublishedRow(9504, 16206, 29862, 23686, 76318),
    "chr20b": PublishedRow(2298, 5560, 6674, 6290, 10022),
    "chr22b": PublishedRow(6194, 8500, 9942, 9658, 13118),
    "esc16b": PublishedRow(292, 300, 296, 298, 306),
    "rou12": PublishedRow(235528, 256320, 278834, 273438, 295752),
    "rou15": PublishedRow(354210, 391270, 381016, 457908, 480352),
    "rou20": PublishedRow(725522, 778284, 804676, 840120, 905246),
    "tai10a": PublishedRow(135028, 152534, 165364, 168096, 189852),
    "tai15a": PublishedRow(388214, 419224, 455778, 451164, 483596),
    "tai17a": PublishedRow(491812, 530978, 550852, 589814, 620964),
    "tai20a": PublishedRow(703482, 753712, 799790, 871480, 915144),
    "tai30a": PublishedRow(1818146, 1903872, 1996442, 2077958, 2213846),
    "tai35a": PublishedRow(2422002, 2555110, 2720986, 2803456, 2925390),
    "tai40a": PublishedRow(3139370, 3281830, 3529402, 3668044, 3727478),
}


@dataclass(frozen=True, eq=False)
class QapInstance:
    name: str
    n: int
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        for label in ("A", "B"):
            m = np.asarray(getattr(self, label))
            if m.shape != (self.n, self.n):
                raise InvalidArgument(f"{label} has shape {m.shape}, expected ({self.n}, {self.n})")
            if not np.all(np.isfinite(m)):
                raise InvalidArgument(f"{label} has non-finite entries")

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.A, self.A.T) and np.array_equal(self.B, self.B.T))

    def value(self, perm) -> float:
        return obj.qap_value(self.A, self.B, perm)


def _number(token):
    try:
        return int(token)
    except ValueError:
        return float(token)


def parse_qaplib(text: str, name: str = "qap", source=None) -> QapInstance:
    """Plain QAPLIB format: ``n``, then the n*n entries of A and of B.

    Error positions are 0-based token offsets.
    """
    tokens = text.split()
    if not tokens:
        raise ParseError("empty input, expected the instance size", source, 0, "token")
    try:
        n = int(tokens[0])
    except ValueError:
        raise ParseError(f"instance size {tokens[0]!r} is not an integer", source, 0, "token") from None
    if n < 1:
        raise ParseError(f"instance size must be positive, got {n}", source, 0, "token")
    need = 1 + 2 * n * n
    if len(tokens) < need:
        raise ParseError(f"truncated input, expected {need} tokens but found {len(tokens)}",
                         source, len(tokens), "token")
    if len(tokens) > need:
        raise ParseError(f"trailing data: {len(tokens)} tokens, expected {need}", source, need, "token")
    values = []
    for pos in range(1, need):
        try:
            v = _number(tokens[pos])
        except ValueError:
            raise ParseError(f"non-numeric token {tokens[pos]!r}", source, pos, "token") from None
        if not np.isfinite(v):
            raise ParseError(f"non-finite token {tokens[pos]!r}", source, pos, "token")
        values.append(v)
    dtype = int if all(isinstance(v, int) for v in values) else float
    arr = np.array(values, dtype=dtype)
    A = arr[: n * n].reshape(n, n)
    B = arr[n * n:].reshape(n, n)
    return QapInstance(name, n, A, B)


def read_qaplib(path) -> QapInstance:
    path = Path(path)
    return parse_qaplib(path.read_text(encoding="utf-8"), name=path.stem, source=str(path))


def qap_problem(instance: QapInstance, mapping: str = "shift") -> obj.ObjectiveContext:
    """Matching objective whose minimisers minimise the QAP objective.

    On permutations F0(P) = const - 2 tr(A P B' P^T), so matching A against
    B' = -B turns QAP minimisation into F0 minimisation. ``mapping="shift"``
    uses B' = c (J - I) - B with c = max B instead, which adds only a
    constant on permutations but keeps every weight nonnegative, hence both
    Laplacians positive semidefinite. ``mapping="negate"`` uses -B and relies
    on the concavity ridge of the objective.

    Diagonal entries contribute sum_i A_ii B_pp(i), a linear cost
    C_ij = A_ii B_jj; with alpha = 2/3 the combined objective is
    proportional to the QAP value plus a constant.
    """
    if not instance.is_symmetric():
        raise UnsupportedInstance(f"{instance.name}: only symmetric QAP instances are supported")
    A = np.asarray(instance.A, dtype=float)
    B = np.asarray(instance.B, dtype=float)
    if np.any(A < 0):
        raise UnsupportedInstance(f"{instance.name}: flow matrix has negative entries")
    dA, dB = np.diag(A).copy(), np.diag(B).copy()
    A_off = A - np.diag(dA)
    B_off = B - np.diag(dB)
    n = instance.n
    if mapping == "shift":
        c = float(B_off.max(initial=0.0))
        B_map = c * (np.ones((n, n)) - np.eye(n)) - B_off
    elif mapping == "negate":
        B_map = -B_off
    else:
        raise InvalidArgument(f"unknown QAP mapping {mapping!r}")
    cost, alpha = None, 0.0
    if np.any(dA) and np.any(dB):
        cost, alpha = np.outer(dA, dB), 2.0 / 3.0
    return obj.ObjectiveContext(A_off, B_map, cost, alpha)


def run_qaplib(instance: QapInstance, cfg: PathConfig = PathConfig(), mapping: str = "shift",
               solver: str = "path") -> dict:
    """Solve a QAPLIB instance; ``qap_value`` is in QAPLIB's own minimisation form."""
    problem = qap_problem(instance, mapping)
    result = solve(problem, solver, cfg)
    value = instance.value(result.permutation)
    row = PUBLISHED.get(instance.name)
    return {
        "name": instance.name,
        "n": instance.n,
        "solver": solver,
        "mapping": mapping,
        "qap_value": value,
        "permutation": [int(j) for j in result.permutation],
        "published": None if row is None else row.__dict__.copy(),
        "wall_time": result.wall_time,
    }


# ---------------------------------------------------------------- synthetic experiments

@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment grid.

    ``model`` names the degree law and ``param`` its parameter; for
    density-curve the ``densities`` grid replaces ``param``. For
    qaplib-table, ``qaplib_files`` lists the instance files.
    """

    kind: str
    model: str = "binomial"
    param: float = 0.3
    sizes: Tuple[int, ...] = (8,)
    sigmas: Tuple[float, ...] = (0.0,)
    densities: Tuple[float, ...] = ()
    samples: int = 1
    solvers: Tuple[str, ...] = ("path",)
    seed: int = 0
    config: PathConfig = field(default_factory=PathConfig)
    qaplib_files: Tuple[str, ...] = ()
    qap_mapping: str = "shift"

    def __post_init__(self):
        if self.kind not in EXPERIMENTS:
            raise InvalidArgument(f"unknown experiment kind {self.kind!r}; choose from {EXPERIMENTS}")
        if self.samples < 1:
            raise InvalidArgument("samples must be at least 1")
        for s in self.solvers:
            if s not in SOLVERS:
                raise InvalidArgument(f"unknown solver {s!r}")
        if not self.solvers:
            raise InvalidArgument("no solvers selected")
        if self.kind == "qaplib-table":
            if not self.qaplib_files:
                raise InvalidArgument("qaplib-table needs at least one instance file")
        else:
            if not self.sizes or not self.sigmas:
                raise InvalidArgument("size and noise grids must be non-empty")
            if self.kind == "density-curve" and not self.densities:
                raise InvalidArgument("density-curve needs a non-empty density grid")

    @property
    def timed(self) -> bool:
        return self.kind == "timing-curve"


def cell_seed(seed: int, point: int, sample: int) -> int:
    """Stable 32-bit seed for one (grid point, replication) cell."""
    return int(np.random.SeedSequence([seed, point, sample]).generate_state(1)[0])


def synthetic_instance(model: RandomGraphModel, sigma: float, seed: int) -> MatchProblem:
    """G from the model, H a randomly relabelled copy, noise added to each independently."""
    g = generate_random_graph(model, [seed, 0])
    h = g.permuted(random_permutation(model.n, [seed, 1]))
    return MatchProblem(add_noise(g, sigma, [seed, 2]), add_noise(h, sigma, [seed, 3]))


def _grid(spec: ExperimentSpec):
    """Cells as (key, payload); keys sort in output order."""
    cells = []
    if spec.kind == "qaplib-table":
        for i, path in enumerate(spec.qaplib_files):
            for solver in spec.solvers:
                cells.append(((i, 0, 0, spec.solvers.index(solver)), ("qap", path, solver)))
        return cells
    params = spec.densities if spec.kind == "density-curve" else (spec.param,)
    point = 0
    for param in params:
        for n in spec.sizes:
            for sigma in spec.sigmas:
                for sample in range(spec.samples):
                    seed = cell_seed(spec.seed, point, sample)
                    for k, solver in enumerate(spec.solvers):
                        cells.append(((point, sample, 0, k), ("syn", param, n, sigma, sample, seed, solver)))
                point += 1
    return cells


def _empty_row(spec, model, n, sigma, solver, sample, seed):
    return {"experiment": spec.kind, "model": model, "n": n, "sigma": sigma, "solver": solver,
            "sample_idx": sample, "f0": "", "half_f0": "", "f_norm": "", "qap_value": "",
            "wall_ms": "", "seed": seed}


def _run_cell(args):
    spec, payload = args
    if payload[0] == "qap":
        _, path, solver = payload
        row = _empty_row(spec, Path(path).stem, "", "", solver, 0, spec.seed)
        try:
            inst = read_qaplib(path)
            row["n"] = inst.n
            rec = run_qaplib(inst, spec.config, spec.qap_mapping, solver)
        except PathMatchError as exc:
            return row, f"{path}: {exc}"
        row["qap_value"] = rec["qap_value"]
        if spec.timed:
            row["wall_ms"] = round(rec["wall_time"] * 1e3, 3)
        return row, None
    _, param, n, sigma, sample, seed, solver = payload
    label = f"{spec.model}({param:g})"
    row = _empty_row(spec, label, n, sigma, solver, sample, seed)
    try:
        problem = synthetic_instance(RandomGraphModel(spec.model, param, n), sigma, seed)
        result = solve(problem, solver, spec.config)
    except PathMatchError as exc:
        return row, f"{label} n={n} sigma={sigma} sample={sample} {solver}: {exc}"
    row.update(f0=result.f0_value, half_f0=result.half_f0, f_norm=result.f_norm_value,
               qap_value=result.qap_value)
    if spec.timed:
        row["wall_ms"] = round(result.wall_time * 1e3, 3)
    return row, None


@dataclass
class ExperimentResult:
    rows: list
    errors: list

    def summary(self):
        """Mean and standard deviation of the numeric columns per (model, n, sigma, solver)."""
        groups = {}
        for r in self.rows:
            key = (r["experiment"], r["model"], r["n"], r["sigma"], r["solver"])
            groups.setdefault(key, []).append(r)
        out = []
        for key, rows in groups.items():
            entry = dict(zip(("experiment", "model", "n", "sigma", "solver"), key))
            entry["count"] = sum(r["f0"] != "" or r["qap_value"] != "" for r in rows)
            for col in ("f0", "half_f0", "f_norm", "qap_value", "wall_ms"):
                vals = np.array([r[col] for r in rows if r[col] != ""], dtype=float)
                entry[f"{col}_mean"] = float(vals.mean()) if len(vals) else ""
                entry[f"{col}_std"] = float(vals.std()) if len(vals) else ""
            out.append(entry)
        return out


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Run every (grid point, replication, solver) cell.

    Solver errors are recorded per cell and do not stop the run. With
    ``jobs > 1`` cells run in worker processes; output order is fixed by the
    grid, so it does not depend on scheduling.
    """
    cells = sorted(_grid(spec), key=lambda c: c[0])
    work = [(spec, payload) for _, payload in cells]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        outcomes = [_run_cell(w) for w in work]
    rows = [row for row, _ in outcomes]
    errors = [err for _, err in outcomes if err is not None]
    for err in errors:
        log.warning("cell failed: %s", err)
    return ExperimentResult(rows, errors)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(rows, columns=CSV_COLUMNS) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def summary_csv(result: ExperimentResult) -> str:
    summary = result.summary()
    if not summary:
        return ""
    return to_csv(summary, tuple(summary[0].keys()))


def loglog_slope(sizes, times) -> float:
    """Least-squares slope of log(time) against log(n)."""
    sizes = np.asarray(sizes, dtype=float)
    times = np.asarray(times, dtype=float)
    if len(sizes) < 2 or np.any(sizes <= 0) or np.any(times <= 0):
        raise InvalidArgument("need at least two positive (n, time) pairs")
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def timing_slope(result: ExperimentResult, solver: str = "path") -> Optional[float]:
    by_n = {}
    for r in result.rows:
        if r["solver"] == solver and r["wall_ms"] != "":
            by_n.setdefault(r["n"], []).append(r["wall_ms"])
    if len(by_n) < 2:
        return None
    ns = sorted(by_n)
    return loglog_slope(ns, [np.median(by_n[n]) for n in ns])
