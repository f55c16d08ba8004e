import numpy as np
import pytest

from conftest import random_weighted
from oracles import brute_match
from pathmatch.assignment import solve_lap_min
from pathmatch.baselines import exhaustive_match, spectral_decomposition, umeyama_match, umeyama_scores
from pathmatch.errors import SizeLimit
from pathmatch.graph import Graph, RandomGraphModel, from_edges, generate_random_graph, random_permutation
from pathmatch.path import MatchProblem, path_match


def test_spectral_decomposition_properties():
    A = random_weighted(10, np.random.default_rng(1))
    sd = spectral_decomposition(A)
    assert np.all(np.diff(sd.eigvals) <= 0)
    assert np.abs(A @ sd.eigvecs - sd.eigvecs * sd.eigvals).max() < 1e-8
    assert np.abs(sd.eigvecs.T @ sd.eigvecs - np.eye(10)).max() < 1e-8
    recon = sd.eigvecs @ np.diag(sd.eigvals) @ sd.eigvecs.T
    assert np.linalg.norm(A - recon) < 1e-6 * np.linalg.norm(A)


def test_umeyama_single_vertex():
    g = Graph(np.zeros((1, 1)))
    res = umeyama_match(MatchProblem(g, g))
    assert list(res.permutation) == [0] and res.f0_value == 0


def test_umeyama_recovers_isomorphism_with_distinct_profiles():
    # rows of |U| pairwise distinct: the planted assignment is the unique score maximum
    rng = np.random.default_rng(11)
    A = random_weighted(8, rng, 0.8)
    U = np.abs(spectral_decomposition(A).eigvecs)
    gaps = [np.abs(U[i] - U[j]).max() for i in range(8) for j in range(i)]
    assert min(gaps) > 1e-6 and np.min(np.diff(np.linalg.eigvalsh(A))) > 1e-6
    g = Graph(A)
    h = g.permuted(random_permutation(8, 4))
    problem = MatchProblem(g, h)
    assert exhaustive_match(problem).f0_value < 1e-20
    assert umeyama_match(problem).f0_value < 1e-20


def test_umeyama_sign_invariance():
    rng = np.random.default_rng(3)
    A, B = random_weighted(7, rng), random_weighted(7, rng)
    U_A = spectral_decomposition(A).eigvecs
    U_B = spectral_decomposition(B).eigvecs
    flips_a = rng.choice([-1.0, 1.0], size=7)
    flips_b = rng.choice([-1.0, 1.0], size=7)
    flipped = np.abs(U_A * flips_a) @ np.abs(U_B * flips_b).T
    scores = umeyama_scores(A, B)
    assert np.array_equal(flipped, scores)
    assert np.array_equal(solve_lap_min(-flipped)[0], solve_lap_min(-scores)[0])


def test_exhaustive_size_limit():
    g = from_edges(11, [])
    with pytest.raises(SizeLimit):
        exhaustive_match(MatchProblem(g, g))


def test_exhaustive_identical_graphs():
    g = generate_random_graph(RandomGraphModel("geometric", 0.4, 7), seed=1)
    assert exhaustive_match(MatchProblem(g, g)).f0_value == 0


@pytest.mark.parametrize("alpha", [0.0, 0.5])
def test_exhaustive_matches_oracle(alpha):
    rng = np.random.default_rng(7)
    for _ in range(5):
        A, B = random_weighted(6, rng), random_weighted(6, rng)
        C = rng.uniform(size=(6, 6)) if alpha else None
        res = exhaustive_match(MatchProblem(Graph(A), Graph(B), C, alpha))
        best, perm = brute_match(A, B, C, alpha)
        assert res.objective_value == pytest.approx(best, rel=1e-12)
        assert list(res.permutation) == list(perm)


def test_exhaustive_ties_pick_lexicographically_smallest():
    empty = from_edges(5, [])
    assert list(exhaustive_match(MatchProblem(empty, empty)).permutation) == [0, 1, 2, 3, 4]


def test_exhaustive_is_lower_bound():
    for seed in range(4):
        g = generate_random_graph(RandomGraphModel("binomial", 0.4, 7), seed=seed)
        h = generate_random_graph(RandomGraphModel("binomial", 0.4, 7), seed=seed + 9)
        problem = MatchProblem(g, h)
        opt = exhaustive_match(problem).f0_value
        assert umeyama_match(problem).f0_value >= opt
        assert path_match(problem).f0_value >= opt
