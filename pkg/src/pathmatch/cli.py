"""``pathmatch`` command line interface.

Exit codes: 0 success, 1 other error, 2 malformed input or usage, 3 numerical
failure. Results go to stdout (or ``--out``); diagnostics go to stderr.
Set ``PATHMATCH_LOG`` to ``quiet``, ``info`` or ``trace`` to control verbosity.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import bench
from . import io as pio
from .errors import NumericalFailure, ParseError, PathMatchError
from .frank_wolfe import FwConfig
from .graph import RandomGraphModel, add_noise, generate_random_graph, random_permutation
from .path import MatchProblem, PathConfig

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_NUMERICAL = 0, 1, 2, 3

LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "trace": logging.DEBUG}

log = logging.getLogger("pathmatch.cli")


def _configure_logging():
    name = os.environ.get("PATHMATCH_LOG", "quiet").strip().lower() or "quiet"
    if name not in LOG_LEVELS:
        print(f"pathmatch: unknown PATHMATCH_LOG={name!r}, using quiet", file=sys.stderr)
        name = "quiet"
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("pathmatch")
    root.handlers[:] = [handler]
    root.setLevel(LOG_LEVELS[name])
    root.propagate = False
    return name


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_path_flags(p):
    d = PathConfig()
    g = p.add_argument_group("continuation settings")
    g.add_argument("--m-ratio", type=float, default=d.m_ratio, help="lambda-step tolerance relaxation M")
    g.add_argument("--dlambda-min", type=float, default=d.d_lambda_min, help="smallest lambda step")
    g.add_argument("--eps", type=float, default=None,
                   help="set both Frank-Wolfe tolerances (value and step) at once")
    g.add_argument("--eps-f", type=float, default=d.fw.eps_f, help="Frank-Wolfe value tolerance")
    g.add_argument("--eps-p", type=float, default=d.fw.eps_p, help="Frank-Wolfe step tolerance")
    g.add_argument("--max-fw-iters", type=int, default=d.fw.max_iters)
    g.add_argument("--criterion", choices=("tracked-minimum", "value-at-point"), default=d.criterion)
    g.add_argument("--no-newton", action="store_true", help="start the convex stage from the uniform matrix")
    g.add_argument("--lap", choices=("scipy", "hungarian"), default=d.lap_method,
                   help="linear assignment backend")


def _path_config(args) -> PathConfig:
    eps_f = args.eps if args.eps is not None else args.eps_f
    eps_p = args.eps if args.eps is not None else args.eps_p
    return PathConfig(
        d_lambda_min=args.dlambda_min,
        m_ratio=args.m_ratio,
        fw=FwConfig(eps_f=eps_f, eps_p=eps_p, max_iters=args.max_fw_iters),
        use_newton_init=not args.no_newton,
        criterion=args.criterion,
        lap_method=args.lap,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathmatch", description=__doc__.splitlines()[0],
                                     epilog="exit codes: 0 ok, 1 error, 2 bad input, 3 numerical failure")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("match", help="match two graphs given as edge lists")
    m.add_argument("graph_a")
    m.add_argument("graph_b")
    m.add_argument("--solver", choices=sorted(bench.SOLVERS), default="path")
    m.add_argument("--alpha", type=float, default=0.0, help="weight of the linear node-cost term")
    m.add_argument("--cost-matrix", help="node dissimilarity matrix file (rows: vertices of A)")
    m.add_argument("--seed", type=int, default=0, help="recorded in the output; solvers are deterministic")
    m.add_argument("--timing", action="store_true", help="include wall time (output no longer reproducible)")
    m.add_argument("--out", help="write the JSON record here instead of stdout")
    _add_path_flags(m)

    q = sub.add_parser("qap", help="solve a symmetric QAPLIB instance")
    q.add_argument("instance")
    q.add_argument("--solver", choices=sorted(bench.SOLVERS), default="path")
    q.add_argument("--mapping", choices=("shift", "negate"), default="shift")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--timing", action="store_true")
    q.add_argument("--out")
    _add_path_flags(q)

    g = sub.add_parser("gen", help="draw a random graph, optionally with a noisy relabelled copy")
    g.add_argument("--model", choices=("binomial", "geometric", "power"), default="binomial")
    g.add_argument("--param", type=float, default=0.3, help="p, mu or tau of the degree law")
    g.add_argument("-n", "--size", type=int, required=True)
    g.add_argument("--sigma", type=float, default=0.0, help="noise level for the copy (and the original)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="edge list of G (default stdout)")
    g.add_argument("--pair-out", help="also write a permuted noisy copy H here")

    b = sub.add_parser("bench", help="run a seeded experiment grid and write CSV")
    b.add_argument("--experiment", choices=bench.EXPERIMENTS, default="noise-curve")
    b.add_argument("--model", choices=("binomial", "geometric", "power"), default="binomial")
    b.add_argument("--param", type=float, default=0.3)
    b.add_argument("--sizes", type=_int_list, default=(8,))
    b.add_argument("--sigmas", type=_float_list, default=(0.0,))
    b.add_argument("--densities", type=_float_list, default=())
    b.add_argument("--samples", type=int, default=1)
    b.add_argument("--solvers", default="path", help="comma-separated subset of " + ",".join(sorted(bench.SOLVERS)))
    b.add_argument("--qaplib", nargs="*", default=(), help="instance files for qaplib-table")
    b.add_argument("--mapping", choices=("shift", "negate"), default="shift")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", help="per-cell CSV (default stdout)")
    b.add_argument("--summary", help="also write per-point mean/std CSV here")
    _add_path_flags(b)
    return parser


def _emit(text, path):
    if path:
        pio.atomic_write(path, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _trace(result):
    for step in result.lambda_trace:
        log.debug("lambda=%.6g value=%.10g fw_iters=%d ok=%s", *step)


def cmd_match(args, parser):
    if args.alpha and args.cost_matrix is None:
        parser.error("--alpha > 0 needs --cost-matrix")
    if args.solver == "umeyama" and (args.alpha or args.cost_matrix):
        parser.error("the umeyama solver does not use a cost matrix")
    cfg = _path_config(args)
    g = pio.read_edge_list(args.graph_a)
    h = pio.read_edge_list(args.graph_b)
    cost = pio.read_cost_matrix(args.cost_matrix) if args.cost_matrix else None
    if cost is not None and cost.shape != (g.n, h.n):
        raise ParseError(f"cost matrix is {cost.shape[0]}x{cost.shape[1]}, graphs have {g.n} and {h.n} vertices",
                         args.cost_matrix)
    result = bench.solve(MatchProblem(g, h, cost, args.alpha), args.solver, cfg)
    _trace(result)
    log.info("%s: f0=%g after %.3fs", args.solver, result.f0_value, result.wall_time)
    config = dict(cfg.as_dict(), solver=args.solver, alpha=args.alpha)
    _emit(pio.dumps(pio.result_record(result, config, args.seed, args.timing)), args.out)


def cmd_qap(args, parser):
    cfg = _path_config(args)
    inst = bench.read_qaplib(args.instance)
    rec = bench.run_qaplib(inst, cfg, args.mapping, args.solver)
    log.info("%s: qap value %g", inst.name, rec["qap_value"])
    if not args.timing:
        rec.pop("wall_time")
    rec["config"] = cfg.as_dict()
    rec["seed"] = args.seed
    _emit(pio.dumps(rec), args.out)


def cmd_gen(args, parser):
    model = RandomGraphModel(args.model, args.param, args.size)
    g = generate_random_graph(model, [args.seed, 0])
    if args.pair_out:
        perm = random_permutation(model.n, [args.seed, 1])
        h = add_noise(g.permuted(perm), args.sigma, [args.seed, 3])
        g = add_noise(g, args.sigma, [args.seed, 2])
        header = "# planted permutation: " + " ".join(str(int(j)) for j in perm) + "\n"
        pio.atomic_write(args.pair_out, header + pio.format_edge_list(h))
    _emit(pio.format_edge_list(g), args.out)


def cmd_bench(args, parser):
    solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    spec = bench.ExperimentSpec(
        kind=args.experiment, model=args.model, param=args.param, sizes=args.sizes, sigmas=args.sigmas,
        densities=args.densities, samples=args.samples, solvers=solvers, seed=args.seed,
        config=_path_config(args), qaplib_files=tuple(args.qaplib), qap_mapping=args.mapping)
    result = bench.run_experiment(spec, jobs=max(1, args.jobs))
    for err in result.errors:
        print(f"pathmatch: cell failed: {err}", file=sys.stderr)
    if args.summary:
        pio.atomic_write(args.summary, bench.summary_csv(result))
    _emit(bench.to_csv(result.rows), args.out)
    if spec.timed:
        slope = bench.timing_slope(result)
        if slope is not None:
            print(f"pathmatch: log-log time slope {slope:.3f}", file=sys.stderr)


COMMANDS = {"match": cmd_match, "qap": cmd_qap, "gen": cmd_gen, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging()
    try:
        COMMANDS[args.command](args, parser)
    except ParseError as exc:
        print(f"pathmatch: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalFailure as exc:
        print(f"pathmatch: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PathMatchError, OSError) as exc:
        print(f"pathmatch: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except np.linalg.LinAlgError as exc:
        print(f"pathmatch: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
