"""Reading and writing graphs, cost matrices and match results.

Edge-list format (``#`` starts a comment)::

    n 5
    0 1
    1 2 0.5

The header gives the vertex count; every further line is ``i j`` or
``i j w`` with 0-based vertex indices. Self-loops and repeated pairs are
rejected.
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, ParseError
from .graph import Graph


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_count(tokens, source, lineno):
    if len(tokens) != 2 or tokens[0] != "n":
        raise ParseError(f"expected header 'n <count>', got {' '.join(tokens)!r}", source, lineno, "line")
    try:
        n = int(tokens[1])
    except ValueError:
        raise ParseError(f"vertex count {tokens[1]!r} is not an integer", source, lineno, "line") from None
    if n < 0:
        raise ParseError(f"negative vertex count {n}", source, lineno, "line")
    return n


def parse_edge_list(text: str, source=None) -> Graph:
    lines = _content_lines(text)
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty edge list, missing 'n <count>' header", source) from None
    n = _parse_count(tokens, source, lineno)
    w = np.zeros((n, n))
    for lineno, tokens in lines:
        if len(tokens) not in (2, 3):
            raise ParseError(f"expected 'i j [w]', got {len(tokens)} fields", source, lineno, "line")
        try:
            i, j = int(tokens[0]), int(tokens[1])
            wt = float(tokens[2]) if len(tokens) == 3 else 1.0
        except ValueError:
            raise ParseError(f"non-numeric field in {' '.join(tokens)!r}", source, lineno, "line") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"vertex index out of range 0..{n - 1}", source, lineno, "line")
        if i == j:
            raise ParseError(f"self-loop on vertex {i}", source, lineno, "line")
        if w[i, j] != 0:
            raise ParseError(f"duplicate edge {i}-{j}", source, lineno, "line")
        if not np.isfinite(wt) or wt <= 0:
            raise ParseError(f"edge weight must be positive and finite, got {wt}", source, lineno, "line")
        w[i, j] = w[j, i] = wt
    return Graph(w)


def format_edge_list(g: Graph) -> str:
    out = [f"n {g.n}"]
    for i, j, wt in g.edges():
        out.append(f"{i} {j}" if wt == 1.0 else f"{i} {j} {wt!r}")
    return "\n".join(out) + "\n"


def parse_cost_matrix(text: str, source=None) -> np.ndarray:
    """Whitespace-separated square matrix, one row per line, optional ``n <count>`` header."""
    rows = []
    expected = None
    for lineno, tokens in _content_lines(text):
        if not rows and expected is None and tokens[0] == "n":
            expected = _parse_count(tokens, source, lineno)
            continue
        try:
            row = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(f"non-numeric entry in {' '.join(tokens)!r}", source, lineno, "line") from None
        if rows and len(row) != len(rows[0]):
            raise ParseError(f"row has {len(row)} entries, expected {len(rows[0])}", source, lineno, "line")
        rows.append(row)
    C = np.array(rows, dtype=float).reshape(len(rows), -1)
    if C.shape[0] != C.shape[1]:
        raise ParseError(f"cost matrix is not square: shape {C.shape}", source)
    if expected is not None and C.shape[0] != expected:
        raise ParseError(f"header announces {expected} rows, found {C.shape[0]}", source)
    if not np.all(np.isfinite(C)):
        raise ParseError("cost matrix has non-finite entries", source)
    return C


def read_text(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def read_edge_list(path) -> Graph:
    return parse_edge_list(read_text(path), source=str(path))


def read_cost_matrix(path) -> np.ndarray:
    return parse_cost_matrix(read_text(path), source=str(path))


def atomic_write(path, data: str):
    """Write ``data`` to a temporary sibling file, then rename it over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def result_record(result, config=None, seed=None, timing: bool = False) -> dict:
    """JSON-ready view of a :class:`~pathmatch.path.MatchResult`.

    Wall time is left out unless ``timing`` is set, so that records of
    seeded runs are byte-reproducible.
    """
    rec = {
        "solver": result.solver,
        "n_g": result.n_g,
        "n_h": result.n_h,
        "permutation": [int(j) for j in result.permutation],
        "dummy": result.dummy_flags(),
        "f0": result.f0_value,
        "half_f0": result.half_f0,
        "f_norm": result.f_norm_value,
        "qap_value": result.qap_value,
        "objective": result.objective_value,
        "lambda_trace": [
            {"lambda": s.lam, "value": s.value, "fw_iters": s.fw_iters, "within_tolerance": s.within_tolerance}
            for s in result.lambda_trace
        ],
        "extra": result.extra,
        "config": config or {},
        "seed": seed,
    }
    if timing:
        rec["wall_time"] = result.wall_time
    return _jsonable(rec)


def dumps(record) -> str:
    return json.dumps(_jsonable(record), indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_record(record, path=None):
    """Write a record as JSON to ``path`` atomically, or return the text when ``path`` is None."""
    text = dumps(record)
    if path is None:
        return text
    if not isinstance(path, (str, os.PathLike)):
        raise InvalidArgument(f"bad output path {path!r}")
    atomic_write(path, text)
    return text
