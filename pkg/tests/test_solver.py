import numpy as np
import pytest

from conftest import cubic_perturbation
from statdiscs.conormal import build_initial_lift, verify_stationary
from statdiscs.geometry import DefiningFunction, HermitianPencil
from statdiscs.solver import (SolveInfo, SolverConfig, SolverError, continuation,
                              family_chart, lift_norm, solve_constrained)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(nf=64, M=128)
    with pytest.raises(ValueError):
        SolverConfig(backtrack=1.5)
    cfg = SolverConfig().with_overrides(nf=16, M=None)
    assert cfg.nf == 16 and cfg.M == SolverConfig().M


def test_tail_slope_of_synthetic_traces():
    quadratic = SolveInfo(4, 1e-16, 0.0, [(0, 1e-1, 0), (1, 1e-3, 1), (2, 1e-6, 1), (3, 1e-12, 1)])
    assert quadratic.tail_slope() == pytest.approx(2.0, abs=0.1)
    linear = SolveInfo(5, 0.0, 0.0, [(k, 10.0 ** -(k + 3), 1) for k in range(6)])
    assert linear.tail_slope() < 1.5
    assert SolveInfo(0, 0.0, 0.0, [(0, 1e-15, 0)]).tail_slope() is None


def test_quadric_start_is_a_fixed_point(unit_chart, unit_quadric):
    lift, info = solve_constrained(unit_quadric, unit_chart.initial, None, unit_chart.config,
                                   unit_chart.frame, return_info=True)
    assert info.iterations == 0
    np.testing.assert_array_equal(lift.cofactors(), unit_chart.initial.cofactors(64))


def test_chart_points_are_stationary_with_prescribed_coordinates(unit_chart, unit_quadric):
    s = np.array([0.2, -0.1, 0.05, 0.1]) * unit_chart.radius
    lift, info = unit_chart(s, return_info=True)
    assert info.residual < 1e-12
    assert verify_stationary(unit_quadric, lift).passes(1e-10)
    np.testing.assert_allclose(unit_chart.frame.coordinates(lift), s, atol=1e-12)


def test_chart_radius_is_enforced(unit_chart):
    with pytest.raises(ValueError):
        unit_chart(np.array([unit_chart.radius, 0.0, 0.0, 0.0]))


def test_tangent_chart_is_linear(unit_pencil, unit_quadric):
    chart = family_chart(unit_quadric, unit_pencil, np.array([1.0]), np.array([1.0]), mode="tangent")
    s = np.array([0.1, 0.0, 0.0, -0.2]) * chart.radius
    a, b = chart(s).cofactors(), chart(2 * s).cofactors()
    base = chart.initial.cofactors(a.shape[1] - 1)
    np.testing.assert_allclose(b - base, 2 * (a - base), atol=1e-14)


def test_perturbed_solve_converges(unit_pencil, unit_chart):
    def_fn = DefiningFunction(unit_pencil, cubic_perturbation(1, 1), 0.02)
    lift, infos = continuation(def_fn, None, unit_chart.config, unit_chart.initial,
                               unit_chart.frame, return_info=True)
    assert len(infos) == unit_chart.config.continuation_steps
    assert infos[-1].residual < 1e-12
    assert verify_stationary(def_fn, lift).passes(1e-10)
    assert lift_norm(lift) > 0


def test_continuation_failure_reports_scale(unit_pencil, unit_chart):
    def_fn = DefiningFunction(unit_pencil, cubic_perturbation(1, 1), 0.02)
    cfg = unit_chart.config.with_overrides(max_iter=1, continuation_steps=2)
    with pytest.raises(SolverError) as err:
        continuation(def_fn, None, cfg, unit_chart.initial, unit_chart.frame)
    assert err.value.t == pytest.approx(0.01)
    assert err.value.trace


def test_codimension_above_cr_dimension_is_rejected():
    pencil = HermitianPencil([np.eye(1), 2 * np.eye(1)])
    f0 = build_initial_lift(pencil, np.array([1.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError, match="d <= n"):
        solve_constrained(DefiningFunction(pencil), f0)
