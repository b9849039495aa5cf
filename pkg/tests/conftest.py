import numpy as np
import pytest

from statdiscs.geometry import (DefiningFunction, HermitianPencil, PerturbationPolynomial,
                                nondegeneracy_report)

C8_MATRICES = [
    np.eye(4),
    np.diag([1.0, 0.0, 0.0, 0.0]),
    np.diag([0.0, 1.0, 0.0, 0.0]),
    np.pad(np.array([[1.0, 0.5], [0.5, 0.0]]), ((0, 2), (0, 2))),
]
C8_V = np.array([0.3, -0.8, 0.5, 0.2], dtype=complex)
C8_C = np.array([1.0, 0.0, 0.0, 0.0])


def random_hermitian(n, rng):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


def random_pencil(n, d, rng):
    """Random pencil; the first matrix is positive definite so condition (t) holds."""
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    mats = [X @ X.conj().T / n + np.eye(n)]
    mats += [random_hermitian(n, rng) for _ in range(d - 1)]
    return HermitianPencil(mats)


def random_fully_nondegenerate(n, d, rng):
    """Random pencil with its (f)/(t) witnesses ``(pencil, V, c)``."""
    while True:
        pencil = random_pencil(n, d, rng)
        rep = nondegeneracy_report(pencil, seed=int(rng.integers(1 << 31)))
        if rep.fully:
            return pencil, rep.witness_V, rep.witness_c


def cubic_perturbation(n, d, component=0):
    """Unit-coefficient ``(Re z_1)^3`` in one component."""
    re_z = (3,) + (0,) * (n - 1)
    return PerturbationPolynomial.single(n, d, component, 1.0, re_z=re_z)


@pytest.fixture(scope="session")
def unit_pencil():
    return HermitianPencil([np.eye(1)])


@pytest.fixture(scope="session")
def unit_quadric(unit_pencil):
    return DefiningFunction(unit_pencil)


@pytest.fixture(scope="session")
def c8_pencil():
    return HermitianPencil(C8_MATRICES)


@pytest.fixture(scope="session")
def unit_chart(unit_pencil, unit_quadric):
    from statdiscs.solver import family_chart
    return family_chart(unit_quadric, unit_pencil, np.array([1.0]), np.array([1.0]))
