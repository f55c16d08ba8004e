"""Graph matching by convex-concave path following.

Quick start::

    from pathmatch import Graph, MatchProblem, path_match
    result = path_match(MatchProblem(g, h))
    result.permutation, result.f0_value
"""

from .assignment import hungarian, project_to_permutation, solve_lap_min
from .baselines import exhaustive_match, umeyama_match
from .bench import ExperimentSpec, QapInstance, parse_qaplib, run_experiment, run_qaplib
from .errors import (GenerationFailed, InvalidArgument, NumericalFailure, ParseError, PathMatchError,
                     SizeLimit, SpectralDegeneracy, UndefinedNormalization, UnsupportedInstance)
from .frank_wolfe import FwConfig, FwResult, fw_minimize
from .graph import (Graph, RandomGraphModel, add_noise, generate_random_graph, laplacian,
                    pad_with_dummies, random_permutation)
from .objectives import ObjectiveContext, f0, f1, f_lambda_alpha, f_norm, grad_f0, grad_f1
from .path import MatchProblem, MatchResult, PathConfig, path_match, qcv_match

__all__ = [
    "ExperimentSpec", "FwConfig", "FwResult", "GenerationFailed", "Graph", "InvalidArgument",
    "MatchProblem", "MatchResult", "NumericalFailure", "ObjectiveContext", "ParseError", "PathConfig",
    "PathMatchError", "QapInstance", "RandomGraphModel", "SizeLimit", "SpectralDegeneracy",
    "UndefinedNormalization", "UnsupportedInstance", "add_noise", "exhaustive_match", "f0", "f1",
    "f_lambda_alpha", "f_norm", "fw_minimize", "generate_random_graph", "grad_f0", "grad_f1",
    "hungarian", "laplacian", "pad_with_dummies", "parse_qaplib", "path_match", "project_to_permutation",
    "qcv_match", "random_permutation", "run_experiment", "run_qaplib", "solve_lap_min", "umeyama_match",
]
