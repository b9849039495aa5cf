import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cubic_perturbation, random_fully_nondegenerate
from statdiscs.analysis import (JetRecoveryError, PolynomialAutomorphism, RankReport,
                                automorphism_corpus, center_jacobian, dilate,
                                jet_determination_experiment, jet_jacobian,
                                jet_jacobian_matrix, jet_map, preservation_residual, preserves,
                                pushforward, recover_from_jet, s_grid)
from statdiscs.conormal import build_initial_lift, verify_stationary
from statdiscs.discs import jet1_at_one
from statdiscs.geometry import (DefiningFunction, HermitianPencil, MonomialTerm,
                                PerturbationPolynomial)
from statdiscs.solver import family_chart


def _perturbed(pencil):
    terms = [MonomialTerm(0, 1.0, (3,), (0,), (0,)), MonomialTerm(0, -0.5, (1,), (0,), (1,)),
             MonomialTerm(0, 0.25, (2,), (2,), (0,))]
    return DefiningFunction(pencil, PerturbationPolynomial(1, 1, terms), 0.3)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_dilation_composes(a, b):
    df = _perturbed(HermitianPencil([np.eye(1)]))
    twice = dilate(dilate(df, a), b)
    once = dilate(df, a * b)
    for s, o in zip(twice.perturbation.terms, once.perturbation.terms):
        assert s.coefficient == pytest.approx(o.coefficient, rel=1e-12)


def test_dilation_fixes_quadrics(unit_quadric):
    assert dilate(unit_quadric, 0.1).is_quadric
    with pytest.raises(ValueError):
        dilate(unit_quadric, 0.0)


def test_automorphism_jets():
    corpus = automorphism_corpus(2, 1)
    assert corpus["identity"].has_trivial_2jet()
    assert corpus["cubic_z"].has_trivial_2jet() and corpus["cubic_w"].has_trivial_2jet()
    assert not corpus["rotation"].has_trivial_2jet()
    quadratic = PolynomialAutomorphism.identity(1, 1).plus_terms([(0, 1.0, (2, 0))])
    assert not quadratic.has_trivial_2jet()
    with pytest.raises(ValueError):
        PolynomialAutomorphism.linear(1, 1, [1.0, 0.0])


def test_automorphism_jacobian_matches_finite_differences():
    F = automorphism_corpus(2, 1)["cubic_w"].plus_terms([(1, 0.3j, (1, 1, 1))])
    rng = np.random.default_rng(0)
    q = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    J = F.jacobian(q)[0]
    h = 1e-6
    for b in range(3):
        e = np.zeros(3)
        e[b] = h
        np.testing.assert_allclose((F(q + e)[0] - F(q - e)[0]) / (2 * h), J[:, b], atol=1e-8)


def test_conjugate_dilation_scales_cubic_terms():
    F = automorphism_corpus(1, 1)["cubic_z"].conjugate_dilation(0.5)
    q = np.array([[0.3 + 0.2j, 0.1j]])
    np.testing.assert_allclose(F(q)[0, 0], q[0, 0] + 0.25 * q[0, 0] ** 3)


def test_preservation_check(unit_quadric):
    corpus = automorphism_corpus(1, 1)
    assert preserves(unit_quadric, corpus["rotation"])
    assert preserves(unit_quadric, corpus["dilation"])
    assert preservation_residual(unit_quadric, corpus["cubic_z"]) > 1e-4


def test_pushforward_by_symmetries_stays_stationary():
    rng = np.random.default_rng(4)
    pencil, V, c = random_fully_nondegenerate(2, 2, rng)
    quad = DefiningFunction(pencil)
    f0 = build_initial_lift(pencil, V, c)
    for name in ("identity", "rotation", "dilation"):
        rep = pushforward(automorphism_corpus(2, 2)[name], f0, return_report=True)
        assert rep.holomorphy_defect < 1e-12
        assert verify_stationary(quad, rep.lift).passes(1e-10)
    assert pushforward(automorphism_corpus(2, 2)["identity"], f0).allclose(f0.realize(), 1e-14)


def test_pushforward_preserves_jet_for_maps_tangent_to_identity(unit_pencil):
    # Discs through the origin at zeta = 1 keep their 1-jet under maps with trivial 2-jet.
    f0 = build_initial_lift(unit_pencil, np.array([0.1]), np.array([1.0]))
    for name in ("cubic_z", "cubic_w"):
        pushed = pushforward(automorphism_corpus(1, 1)[name], f0, nf=32)
        np.testing.assert_allclose(jet1_at_one(pushed), jet1_at_one(f0), atol=1e-12)


def test_rank_report():
    rep = RankReport.from_matrix(np.diag([1.0, 1e-3, 1e-9]), expected=3)
    assert rep.rank == 2 and not rep.full_rank
    assert rep.relative_min == pytest.approx(1e-9)


def test_unit_chart_maps_have_full_rank(unit_chart):
    assert center_jacobian(unit_chart).full_rank
    assert jet_jacobian(unit_chart).full_rank


@pytest.mark.slow
def test_jet_map_has_full_rank_for_two_variables():
    rng = np.random.default_rng(21)
    pencil, V, c = random_fully_nondegenerate(2, 1, rng)
    chart = family_chart(DefiningFunction(pencil), pencil, V, c)
    assert RankReport.from_matrix(jet_jacobian_matrix(chart), 6).full_rank


def test_jet_recovery_with_restarts(unit_chart):
    s = np.array([0.1, -0.2, 0.15, 0.05]) * unit_chart.radius
    J = jet_jacobian_matrix(unit_chart)
    s_rec, info = recover_from_jet(unit_chart, jet_map(unit_chart, s), restarts=2, jacobian=J,
                                   return_info=True)
    np.testing.assert_allclose(s_rec, s, atol=1e-8)
    assert not info.ambiguous


def test_jet_recovery_reports_unreachable_targets(unit_chart):
    J = jet_jacobian_matrix(unit_chart)
    target = jet_map(unit_chart, np.zeros(4)) + 10.0
    with pytest.raises((JetRecoveryError, ValueError)):
        recover_from_jet(unit_chart, target, restarts=0, jacobian=J, max_iter=3)


def test_s_grid_stays_inside_chart():
    pts = s_grid(4, 1.0, points=5)
    assert len(pts) == 25
    assert max(np.linalg.norm(p) for p in pts) < 1.0


def test_experiment_rejects_maps_with_nontrivial_jets(unit_pencil, unit_chart):
    def_fn = DefiningFunction(unit_pencil, cubic_perturbation(1, 1), 0.02)
    rep = jet_determination_experiment(def_fn, automorphism_corpus(1, 1)["rotation"], unit_chart)
    assert rep["status"] == "rejected" and rep["records"] == []
