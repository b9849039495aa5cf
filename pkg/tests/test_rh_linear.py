import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import C8_C, C8_V, random_fully_nondegenerate
from statdiscs.conormal import build_initial_lift
from statdiscs.geometry import DefiningFunction
from statdiscs.rh_linear import (R_BLOCK, BoundaryMatrix, KernelError, StructureError,
                                 _null_space_with_gap, assemble_G, birkhoff_factor_2x2,
                                 boundary_matrix_at_point, explicit_kernel_basis, gram_D,
                                 gram_DA, linear_operator, maslov_index, numeric_kernel,
                                 partial_indices_structured, principal_angles, symbol_winding)


def _diag_monomials(degrees, scale=1.0):
    degrees = list(degrees)
    top = max(degrees)
    coeffs = [np.zeros((len(degrees), len(degrees)), dtype=complex) for _ in range(top + 1)]
    for i, k in enumerate(degrees):
        coeffs[k][i, i] = scale
    return coeffs


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=4))
def test_maslov_index_of_diagonal_monomials(degrees):
    G = BoundaryMatrix.from_poly(_diag_monomials(degrees), M=64)
    assert maslov_index(G) == 2 * sum(degrees)
    assert symbol_winding(G) == sum(degrees)


def test_winding_refines_coarse_grids():
    # zeta^3 on 8 points advances 3 pi / 4 per step, too coarse to count directly.
    G = BoundaryMatrix.from_poly(_diag_monomials([3]), M=8)
    assert symbol_winding(G) == 3


def test_r_block_symbol_has_winding_two():
    R = BoundaryMatrix.from_poly(R_BLOCK, M=64)
    assert maslov_index(R) == 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.booleans(),
       st.complex_numbers(min_magnitude=0.5, max_magnitude=2),
       st.complex_numbers(min_magnitude=0.5, max_magnitude=2))
def test_birkhoff_factorization_reconstructs_symbol(ka, kb, anti, a, b):
    coeffs = [np.zeros((2, 2), dtype=complex) for _ in range(max(ka, kb) + 1)]
    if anti:
        coeffs[ka][0, 1], coeffs[kb][1, 0] = a, b
    else:
        coeffs[ka][0, 0], coeffs[kb][1, 1] = a, b
    fac = birkhoff_factor_2x2(coeffs)
    assert sorted(fac.indices) == sorted([ka, kb])
    for zeta in np.exp(1j * np.linspace(0, 6, 5)):
        expected = sum(C * zeta ** k for k, C in enumerate(coeffs))
        np.testing.assert_allclose(fac.product(zeta), expected, atol=1e-12)


def test_birkhoff_rejects_general_symbols():
    with pytest.raises(StructureError):
        birkhoff_factor_2x2([np.ones((2, 2)), np.eye(2)])


def test_unstructured_matrix_has_no_partial_indices():
    G = BoundaryMatrix.from_function(lambda z: np.eye(2)[None] * np.ones((len(z), 1, 1)), M=16)
    with pytest.raises(StructureError):
        partial_indices_structured(G)


@pytest.fixture(scope="module")
def instance():
    rng = np.random.default_rng(11)
    pencil, V, c = random_fully_nondegenerate(2, 1, rng)
    f0 = build_initial_lift(pencil, V, c)
    return pencil, V, c, f0, assemble_G(DefiningFunction(pencil), f0)


def test_structured_form_matches_samples(instance):
    pencil, V, c, f0, G = instance
    assert G.structured
    assert G.structure_defect() < 1e-12
    data = partial_indices_structured(G)
    assert data.partial_indices == [0, 1, 1, 1, 1, 2]
    assert data.maslov == maslov_index(G) == 6


def test_kernel_elements_are_annihilated(instance):
    pencil, V, c, f0, G = instance
    op = linear_operator(G)
    for kb in (numeric_kernel(G, constrained=True, nf=16),
               explicit_kernel_basis(pencil, V, c, nf=16)):
        for element in kb.basis:
            assert np.max(np.abs(op(element))) < 1e-10


def test_numeric_and_explicit_kernels_agree(instance):
    pencil, V, c, f0, G = instance
    numeric = numeric_kernel(G, constrained=True, nf=16)
    explicit = explicit_kernel_basis(pencil, V, c, nf=16)
    assert numeric.dim == explicit.dim == 6
    assert np.max(principal_angles(numeric, explicit)) < 1e-8
    assert numeric_kernel(G, constrained=False, nf=16).dim == 12


def test_truncation_needs_a_fine_grid(instance):
    G = instance[4]
    with pytest.raises(ValueError):
        numeric_kernel(G, nf=200)


def test_gap_detection():
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    clear = Q @ np.diag([1, 1, 1, 1, 1, 1, 1e-14, 1e-15])
    assert len(_null_space_with_gap(clear)[0]) == 2
    blurred = Q @ np.diag(np.logspace(0, -15, 8))
    with pytest.raises(KernelError):
        _null_space_with_gap(blurred)


def test_gram_matrices(instance, c8_pencil):
    pencil, V, c, _, _ = instance
    assert gram_D(pencil, V).positive_definite
    assert gram_DA(pencil, V, c)[1]
    assert not gram_D(c8_pencil, C8_V).positive_definite
    assert not gram_DA(c8_pencil, C8_V, C8_C)[1]


def test_boundary_matrix_at_origin_is_invertible(instance):
    pencil, _, c, _, _ = instance
    G1 = boundary_matrix_at_point(DefiningFunction(pencil), c)
    assert np.linalg.svd(G1, compute_uv=False)[-1] > 1e-8
