import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_fully_nondegenerate, random_pencil
from statdiscs.conormal import (ConormalSystem, build_initial_lift, build_quadric_lift,
                                eval_conormal, quadric_rows_direct,
                                verify_stationary, zero_section_hit)
from statdiscs.discs import AnalyticDisc, LiftedDisc, grid
from statdiscs.geometry import (DefiningFunction, HermitianPencil, PerturbationPolynomial,
                                find_invertible_combination)

shapes = st.sampled_from([(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (1, 3)])


def _random_quadric_lift(n, d, seed):
    rng = np.random.default_rng(seed)
    pencil = random_pencil(n, d, rng)
    c = find_invertible_combination(pencil, seed=seed)
    V = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    W = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return pencil, build_quadric_lift(pencil, V, W, c, rng.standard_normal(d), M=64), rng


@settings(max_examples=30, deadline=None)
@given(shapes, st.integers(0, 10 ** 6))
def test_quadric_lifts_are_stationary(shape, seed):
    pencil, lift, _ = _random_quadric_lift(*shape, seed)
    rep = verify_stationary(DefiningFunction(pencil), lift)
    assert rep.passes(1e-11)
    assert rep.c_mode_excess < 1e-11


@settings(max_examples=30, deadline=None)
@given(shapes, st.integers(0, 10 ** 6))
def test_rows_match_direct_quadric_formula(shape, seed):
    n, d = shape
    rng = np.random.default_rng(seed)
    pencil = random_pencil(n, d, rng)
    M = 16
    zeta = grid(M)
    samples = rng.standard_normal((2 * n + 2 * d, M)) + 1j * rng.standard_normal((2 * n + 2 * d, M))
    rows = ConormalSystem(DefiningFunction(pencil)).on_samples(samples, zeta)["rows"].T
    np.testing.assert_allclose(rows, quadric_rows_direct(pencil, samples, zeta), atol=1e-11)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([(1, 1), (2, 1), (2, 2)]), st.integers(0, 10 ** 6))
def test_linearization_matches_finite_differences(shape, seed):
    n, d = shape
    rng = np.random.default_rng(seed)
    pert = PerturbationPolynomial.single(n, d, 0, 1.0, re_z=(2,) + (0,) * (n - 1),
                                         im_w=(1,) + (0,) * (d - 1))
    df = DefiningFunction(random_pencil(n, d, rng), pert, 0.3)
    system = ConormalSystem(df)
    N = 2 * n + 2 * d
    q = 0.3 * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
    zeta = np.exp(1j * rng.uniform(0, 2 * np.pi))

    def rows(x):
        s = x[:, None]
        return system.on_samples(s, np.array([zeta]))["rows"][0]

    G = system.on_samples(q[:, None], np.array([zeta]), linearize=True)["G"][0]
    h = 1e-6
    for _ in range(3):
        f = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        fd = (rows(q + h * f) - rows(q - h * f)) / (2 * h)
        np.testing.assert_allclose(fd, 2 * (G.conj() @ f).real, atol=1e-6)


def test_initial_lift_is_stationary():
    rng = np.random.default_rng(0)
    pencil, V, c = random_fully_nondegenerate(2, 2, rng)
    lift = build_initial_lift(pencil, V, c)
    rep = verify_stationary(DefiningFunction(pencil), lift)
    assert rep.passes(1e-12)
    assert np.max(np.abs(eval_conormal(DefiningFunction(pencil), lift))) < 1e-12
    np.testing.assert_allclose(rep.c_of_zeta, np.outer(c, np.ones(lift.M)), atol=1e-12)


def test_perturbed_disc_fails_attachment():
    pencil, lift, _ = _random_quadric_lift(2, 1, 3)
    h = lift.h + AnalyticDisc.constant([0.1, 0.0], nf=lift.h.nf, M=lift.M)
    bad = LiftedDisc(h, lift.g, lift.ht, lift.gt)
    rep = verify_stationary(DefiningFunction(pencil), bad)
    assert rep.attachment_sup > 1e-3
    assert not rep.passes(1e-8)


def test_complex_multiplier_fails_realness():
    pencil, lift, _ = _random_quadric_lift(1, 1, 4)
    gt = AnalyticDisc.from_polys([0.0], [0.5j], M=lift.M)
    bad = LiftedDisc(lift.h, lift.g, lift.ht, gt)
    rep = verify_stationary(DefiningFunction(pencil), bad)
    assert rep.realness_defect > 0.1


def test_zero_section():
    pencil, lift, _ = _random_quadric_lift(1, 1, 5)
    assert not zero_section_hit(lift)
    zero = AnalyticDisc.zeros(1, 1, lift.M)
    assert zero_section_hit(LiftedDisc(lift.h, lift.g, zero, zero))


def test_builders_validate_inputs():
    pencil = HermitianPencil([np.eye(2)])
    with pytest.raises(ValueError):
        build_quadric_lift(pencil, [1.0, 0.0], [0.0, 0.0], [1.0])
    with pytest.raises(ValueError):
        build_initial_lift(pencil, [0.0, 0.0], [1.0])
    with pytest.raises(ValueError):
        build_initial_lift(pencil, [1.0, 0.0], [0.0])
