import math

import numpy as np
import pytest

from designforge.kernel import Configuration, _energy_raw, energy, energy_gradient, make_kernel
from designforge.solver import (
    SolveOptions,
    descent_step,
    descent_velocities,
    initial_configuration,
    initial_energy_bound,
    scaling_study,
    solve,
)
from designforge.sphere import eq_partition


def test_solve_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(tolerance=0.0)
    with pytest.raises(ValueError):
        SolveOptions(backtracking=1.0)
    with pytest.raises(ValueError):
        SolveOptions(armijo=0.0)
    with pytest.raises(ValueError):
        SolveOptions(max_iterations=-1)


def test_initial_configuration_centers():
    spec = make_kernel(2, 2)
    config, bound = initial_configuration(spec, 4, mode="centers")
    assert config.N == 4
    p = eq_partition(2, 4)
    for i in range(4):
        assert p.regions[i].contains(config.coords[i])
    assert math.isfinite(energy(config))
    assert bound == pytest.approx(initial_energy_bound(spec, p))


def test_initial_configuration_random_reproducible():
    spec = make_kernel(2, 3)
    a, _ = initial_configuration(spec, 16, mode="random-in-region", seed=9)
    b, _ = initial_configuration(spec, 16, mode="random-in-region", seed=9)
    assert np.array_equal(a.coords, b.coords)
    c, _ = initial_configuration(spec, 16, mode="random-in-region", seed=10)
    assert not np.array_equal(a.coords, c.coords)


def test_initial_configuration_random_points_stay_in_regions():
    spec = make_kernel(2, 3)
    p = eq_partition(2, 25)
    config, _ = initial_configuration(spec, 25, mode="random-in-region", seed=3, partition=p)
    for i in range(25):
        assert p.regions[i].contains(config.coords[i])


def test_initial_configuration_unknown_mode():
    with pytest.raises(ValueError):
        initial_configuration(make_kernel(2, 2), 4, mode="grid")


def test_initial_energy_bound_hemispheres():
    # d=2, n=1, N=2: g'(1) * norm^2 / N = 1.5 * 4 / 2
    spec = make_kernel(2, 1)
    assert initial_energy_bound(spec, eq_partition(2, 2)) == pytest.approx(3.0)


def test_initial_energy_bound_decreases_with_N():
    spec = make_kernel(2, 4)
    bounds = [initial_energy_bound(spec, eq_partition(2, N)) for N in (100, 400, 1600)]
    assert bounds[0] > bounds[1] > bounds[2]
    # norm ~ N^(-1/2) on S^2 makes the bound scale like N^(-2)
    assert bounds[0] / bounds[2] == pytest.approx(16.0**2, rel=0.5)


def test_descent_step_zero_time():
    spec = make_kernel(2, 2)
    config, _ = initial_configuration(spec, 6, mode="centers")
    out = descent_step(config, 0.0)
    assert np.array_equal(out.coords, config.coords)


def test_descent_step_fixed_point_at_design():
    spec = make_kernel(2, 1)
    config = Configuration(spec, np.array([[0.0, 0, 1], [0.0, 0, -1]]))
    out = descent_step(config, 0.5)
    assert np.array_equal(out.coords, config.coords)


def test_descent_step_decreases_energy():
    spec = make_kernel(2, 1)
    config = Configuration(spec, np.array([[1.0, 0, 0], [0.0, 1, 0]]))
    before = energy(config)
    after = energy(descent_step(config, 1e-3))
    assert after < before


def test_descent_step_rejects_negative_time():
    spec = make_kernel(2, 1)
    config = Configuration(spec, np.array([[1.0, 0, 0], [0.0, 1, 0]]))
    with pytest.raises(ValueError):
        descent_step(config, -1.0)


def test_descent_velocities_match_energy_gradient():
    # independent derivations: field gradient vs -(N/2) energy gradient
    spec = make_kernel(2, 4)
    rng = np.random.default_rng(44)
    X = rng.standard_normal((17, 3))
    X /= np.linalg.norm(X, axis=1)[:, None]
    config = Configuration(spec, X)
    velocities = descent_velocities(config)
    grads = energy_gradient(config)
    for v, g in zip(velocities, grads):
        expected = -(config.N / 2.0) * g.dir
        scale = max(np.linalg.norm(expected), 1e-30)
        assert np.max(np.abs(v.dir - expected)) <= 1e-12 * scale


def test_solve_two_points_reach_antipodal():
    spec = make_kernel(2, 1)
    config = Configuration(spec, np.array([[1.0, 0, 0], [0.0, 1, 0]]))
    final, report = solve(spec, config)
    assert report.terminated == "converged"
    assert report.final_residual <= 1e-12
    assert np.max(np.abs(final.coords.sum(axis=0))) <= 1e-9


def test_solve_partition_init_converges():
    spec = make_kernel(2, 3)
    config, bound = initial_configuration(spec, 32, mode="random-in-region", seed=7)
    final, report = solve(spec, config, SolveOptions(tolerance=1e-12), initial_bound=bound)
    assert report.terminated == "converged"
    assert report.iterations <= 100_000
    assert report.initial_bound == pytest.approx(bound)
    norms = np.linalg.norm(final.coords, axis=1)
    assert np.max(np.abs(norms - 1.0)) <= 1e-12


def test_solve_converged_input_is_noop():
    spec = make_kernel(2, 1)
    config = Configuration(spec, np.array([[0.0, 0, 1], [0.0, 0, -1]]))
    final, report = solve(spec, config)
    assert report.terminated == "converged"
    assert report.iterations <= 1
    assert report.final_residual <= 1e-12


def test_solve_trace_monotone_and_consistent():
    spec = make_kernel(2, 2)
    config, _ = initial_configuration(spec, 12, mode="random-in-region", seed=2)
    final, report = solve(spec, config)
    trace = np.array(report.energy_trace)
    assert np.all(np.diff(trace) <= 0.0)
    assert len(report.step_trace) == report.iterations
    assert report.terminated == "converged"
    assert report.final_residual == math.sqrt(max(trace[-1], 0.0))


def test_solve_deterministic():
    spec = make_kernel(2, 3)
    config, _ = initial_configuration(spec, 20, mode="random-in-region", seed=5)
    _, r1 = solve(spec, config)
    _, r2 = solve(spec, config)
    assert r1.energy_trace == r2.energy_trace
    assert r1.step_trace == r2.step_trace
    assert r1.final_residual == r2.final_residual


def test_solve_respects_max_iterations():
    spec = make_kernel(2, 4)
    config, _ = initial_configuration(spec, 50, mode="random-in-region", seed=1)
    _, report = solve(spec, config, SolveOptions(max_iterations=3))
    assert report.iterations <= 3
    assert report.terminated in ("max_iterations", "converged")


def test_solve_underpopulated_does_not_converge():
    # N = 6 cannot host a strength-5 design; the solver must report, not loop
    spec = make_kernel(2, 5)
    config, _ = initial_configuration(spec, 6, mode="random-in-region", seed=0)
    _, report = solve(spec, config, SolveOptions(max_iterations=2000))
    assert report.terminated in ("stalled", "max_iterations")
    assert report.final_residual > 1e-3


def test_solve_auto_step_seed_value():
    spec = make_kernel(2, 2)
    config, _ = initial_configuration(spec, 8, mode="centers")
    _, report = solve(spec, config)
    expected0 = 1.0 / (3.0 * spec.gpp1 + spec.gp1)
    assert report.step_trace[0] <= expected0 / 0.5 + 1e-15
    assert report.step_trace[0] >= expected0 * 0.5**61


def test_solve_report_serializes():
    spec = make_kernel(2, 1)
    config = Configuration(spec, np.array([[0.0, 0, 1], [0.0, 0, -1]]))
    _, report = solve(spec, config)
    doc = report.to_dict()
    assert set(doc) == {
        "iterations", "energy_trace", "step_trace", "final_residual",
        "terminated", "initial_bound", "mz_checked",
    }
    assert doc["mz_checked"] is False


def test_scaling_study_rows():
    rows = scaling_study(2, [1, 2, 3], lambda n: 2 * (n + 1) ** 2, seed=0)
    assert [r["n"] for r in rows] == [1, 2, 3]
    for r in rows:
        assert r["converged"] is True
        assert r["residual"] <= 1e-12
        assert set(r) == {"d", "n", "N", "converged", "residual", "iterations", "seconds"}


def test_solver_iterates_stay_unit():
    spec = make_kernel(3, 3)
    config, _ = initial_configuration(spec, 60, mode="random-in-region", seed=11)
    final, report = solve(spec, config)
    assert report.terminated == "converged"
    assert np.max(np.abs(np.linalg.norm(final.coords, axis=1) - 1.0)) <= 1e-12


def test_energy_decrease_satisfies_armijo_condition():
    spec = make_kernel(2, 3)
    config, _ = initial_configuration(spec, 24, mode="random-in-region", seed=8)
    X = config.coords
    from designforge.solver import _velocity_rows

    opts = SolveOptions()
    V = _velocity_rows(spec, X)
    S = float(np.sum(V * V))
    e0 = _energy_raw(spec, X)
    from designforge.sphere import _geodesic_rows

    t = 1.0 / (3.0 * spec.gpp1 + spec.gp1)
    e1 = _energy_raw(spec, _geodesic_rows(X, V, t))
    assert e1 <= e0 - opts.armijo * t * (2.0 / config.N) * S
