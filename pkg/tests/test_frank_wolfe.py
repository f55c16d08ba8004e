import numpy as np
import pytest

from conftest import random_ds, random_weighted
from oracles import grid_argmin, lp_optimality_gap
from pathmatch.assignment import is_doubly_stochastic, perm_to_matrix, solve_lap_min, uniform
from pathmatch.errors import InvalidArgument, NumericalFailure
from pathmatch.frank_wolfe import FwConfig, fw_minimize, line_search_quadratic
from pathmatch.objectives import ObjectiveContext, PathObjective


def test_line_search_examples():
    # (t - 0.3)^2 = t^2 - 0.6 t + 0.09
    assert line_search_quadratic(1.0, -0.6) == pytest.approx(0.3)
    assert line_search_quadratic(-1.0, 0.0) == 1.0
    assert line_search_quadratic(0.0, 2.0) == 0.0
    assert line_search_quadratic(0.0, -2.0) == 1.0
    assert line_search_quadratic(1.0, 5.0) == 0.0
    assert line_search_quadratic(1.0, -5.0) == 1.0


def test_line_search_matches_grid_on_f_lambda():
    rng = np.random.default_rng(4)
    for trial in range(20):
        n = 6
        ctx = ObjectiveContext(random_weighted(n, rng), random_weighted(n, rng))
        f = PathObjective(ctx, rng.uniform())
        P = random_ds(n, rng)
        S = perm_to_matrix(rng.permutation(n))
        D = S - P
        b = float(np.vdot(f.gradient(P), D))
        a = f.value(S) - f.value(P) - b
        t = line_search_quadratic(a, b)
        t_grid, v_grid = grid_argmin(lambda s: f.value(P + s * D))
        assert f.value(P + t * D) <= v_grid + 1e-12 * (1 + abs(v_grid))
        if a > 0:
            assert abs(t - t_grid) <= 1e-3


def test_fw_config_validation():
    with pytest.raises(InvalidArgument):
        FwConfig(eps_f=0.0)
    with pytest.raises(InvalidArgument):
        FwConfig(max_iters=0)


def test_converges_to_interior_target():
    X0 = random_ds(5, np.random.default_rng(2))
    res = fw_minimize(lambda P: np.sum((P - X0) ** 2), lambda P: 2 * (P - X0), uniform(5),
                      FwConfig(1e-12, 1e-9, 20000))
    assert np.abs(res.minimizer - X0).max() < 1e-3
    assert res.value < 1e-6


def test_linear_objective_reaches_hungarian_vertex_in_one_step():
    C = np.random.default_rng(3).normal(size=(7, 7))
    res = fw_minimize(lambda P: np.sum(C * P), lambda P: C, uniform(7))
    perm, total = solve_lap_min(C)
    assert np.array_equal(res.minimizer, perm_to_matrix(perm))
    assert res.value == pytest.approx(total)
    # one step to the vertex, the second linearisation certifies optimality
    assert res.iters <= 2


def test_iterates_feasible_and_monotone():
    rng = np.random.default_rng(6)
    ctx = ObjectiveContext(random_weighted(12, rng), random_weighted(12, rng))
    f = PathObjective(ctx, 0.0)
    seen = []

    def grad(P):
        seen.append((P.copy(), f.value(P)))
        return f.gradient(P)

    res = fw_minimize(f.value, grad, uniform(12), FwConfig(1e-12, 1e-12, 300))
    assert len(seen) > 50
    for P, _ in seen:
        assert is_doubly_stochastic(P, 1e-8)
    values = [v for _, v in seen]
    assert all(b <= a + 1e-9 * (1 + abs(a)) for a, b in zip(values, values[1:]))
    assert res.value == pytest.approx(f.value(res.minimizer))


@pytest.mark.parametrize("seed", [8, 9])
def test_qcv_solution_satisfies_kkt(seed):
    # objective scaled by ||A_G||^2 + ||A_H||^2, as inside the solver
    rng = np.random.default_rng(seed)
    ctx = ObjectiveContext(random_weighted(6, rng), random_weighted(6, rng))
    f = PathObjective(ctx, 0.0, scale=ctx.norm)
    res = fw_minimize(f.value, f.gradient, uniform(6), FwConfig(1e-14, 1e-12, 20000))
    assert res.gap >= 0
    gap = lp_optimality_gap(f.gradient(res.minimizer), res.minimizer)
    assert -1e-9 <= gap < 1e-4


def test_non_finite_objective_raises():
    with pytest.raises(NumericalFailure):
        fw_minimize(lambda P: np.nan, lambda P: P, uniform(3))
    with pytest.raises(NumericalFailure):
        fw_minimize(lambda P: 0.0, lambda P: np.full_like(P, np.inf), uniform(3))
