import math

import numpy as np
import pytest

from conftest import make_model
from quasinodal import (
    Potential,
    SolverOptions,
    count_nodes,
    nehari_residuals,
    solve_annulus_ground,
    solve_k_node,
    solve_least_energy_sign_changing,
    vanishing_seed,
)
from quasinodal.errors import (
    InfeasiblePartition,
    InnerSolveFailed,
    MaxItersExceeded,
    SeedConstructionFailed,
    SeedNotProjectable,
    TooFewNodes,
)
from quasinodal.solvers import _golden


@pytest.fixture(scope="module")
def ground(small_model):
    return solve_annulus_ground(small_model)


def test_ground_state_contract(small_model, ground):
    u, rep = ground
    assert rep.converged and rep.el_residual <= 1e-6
    assert rep.energy > 0 and rep.node_count == 0
    assert np.all(u.values >= 0) and u.values[0] > 0
    assert max(rep.nehari_residuals) <= 1e-10
    # the profile decays towards the truncation radius
    assert u.values[-1] < 1e-6 * u.values[0]


def test_descent_is_monotone(ground):
    energies = [e for _, e, _ in ground[1].trace]
    assert all(b <= a for a, b in zip(energies[:-1], energies[1:]))


def test_seed_independence(small_model, ground):
    _, rep = solve_annulus_ground(small_model, opts=SolverOptions(seed="gaussian"))
    assert rep.energy == pytest.approx(ground[1].energy, rel=1e-4)


def test_negative_ground_state_mirrors(small_model, ground):
    u, rep = solve_annulus_ground(small_model, sign=-1)
    assert np.all(u.values <= 0)
    assert rep.energy == pytest.approx(ground[1].energy, rel=1e-10)


def test_annulus_solution_is_supported_inside(small_model):
    u, rep = solve_annulus_ground(small_model, (4.0, 12.0))
    r = small_model.grid.nodes
    assert np.all(u.values[(r <= 4.0) | (r >= 12.0)] == 0)
    assert np.all(u.values >= 0) and rep.energy > 0 and rep.converged


def test_small_ball_is_not_projectable():
    em = make_model(R=1.0, n=999)
    with pytest.raises(SeedNotProjectable):
        solve_annulus_ground(em, (0.0, 0.25))


def test_too_few_nodes(small_model):
    with pytest.raises(TooFewNodes):
        solve_annulus_ground(small_model, (1.0, 1.2))


def test_iteration_cap_raises(small_model):
    opts = SolverOptions(max_iters=2, newton_descent=False, newton_switch=0.0)
    with pytest.raises(MaxItersExceeded) as err:
        solve_annulus_ground(small_model, opts=opts)
    assert err.value.report is not None and not err.value.report.converged


def test_k_zero_is_ground_state(small_model, ground):
    _, rep = solve_k_node(small_model, 0)
    assert rep.energy == pytest.approx(ground[1].energy, rel=1e-12)


@pytest.fixture(scope="module")
def one_node(small_model):
    return solve_k_node(small_model, 1)


def test_one_node_solution(small_model, ground, one_node):
    u, rep = one_node
    assert rep.converged and count_nodes(u) == 1 and rep.node_count == 1
    assert u.values[0] > 0
    assert rep.energy >= 2 * ground[1].energy
    outer = [e for _, e, _ in rep.trace]
    assert all(b <= a for a, b in zip(outer[:-1], outer[1:]))
    # the Newton-polished field is a discrete solution with both Nehari constraints
    assert rep.el_residual <= 1e-6
    scale = small_model.full.grad_sq(u.values)
    assert all(abs(x) <= 1e-9 * scale for x in nehari_residuals(small_model, u))


def test_negative_start_sign(small_model, one_node):
    u, rep = solve_k_node(small_model, 1, sign=-1)
    assert u.values[0] < 0 and rep.node_count == 1
    assert rep.energy == pytest.approx(one_node[1].energy, rel=1e-8)


def test_infeasible_partitions(small_model):
    with pytest.raises(InfeasiblePartition):
        solve_k_node(small_model, 2, opts=SolverOptions(initial_radii=(5.0,)))
    # a central ball of radius 1 has first eigenvalue pi^2 > l = 1
    with pytest.raises(InfeasiblePartition):
        solve_k_node(small_model, 1, opts=SolverOptions(initial_radii=(1.0,), max_sweeps=0))


def test_inner_failure_names_the_annulus(small_model):
    opts = SolverOptions(max_iters=1, newton_descent=False, newton_switch=0.0)
    with pytest.raises(InnerSolveFailed) as err:
        solve_k_node(small_model, 1, opts=opts)
    assert err.value.index == 0 and err.value.annulus[0] == 0.0


def test_sign_changing_paths_agree(small_model, one_node):
    u, rep = solve_least_energy_sign_changing(small_model)
    assert rep.node_count == 1 and rep.converged
    assert rep.extras["path_gap_rel"] <= 1e-2
    assert rep.energy <= one_node[1].energy * (1 + 1e-10)


def test_golden_section_finds_minimum():
    x, fx = _golden(lambda x: (x - 1.3) ** 2 + 2.0, 0.0, 4.0, 1e-6)
    assert x == pytest.approx(1.3, abs=1e-6) and fx == pytest.approx(2.0)
    x, fx = _golden(lambda x: math.inf if x < 2 else x, 0.0, 4.0, 1e-4)
    assert x == pytest.approx(2.0, abs=1e-3)


def test_vanishing_seed_threshold():
    em = make_model(R=2.0, n=2399, l=100.0, pot=Potential.remark13())
    with pytest.raises(SeedConstructionFailed):
        vanishing_seed(em)
    em = make_model(R=2.0, n=2399, l=400.0, pot=Potential.remark13())
    info = vanishing_seed(em)
    for lo, hi, p_lo, p_hi in info["brackets"]:
        assert lo < hi and p_lo > 0 > p_hi
    assert count_nodes(info["field"]) == 1
