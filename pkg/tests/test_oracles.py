"""The reference routines must themselves be right before anything is checked against them."""
import numpy as np
import pytest

from dyncorr import oracles
from dyncorr.models import SIGMA_MINUS, SIGMA_Z

from helpers import random_hermitian


def test_expm_on_diagonal_and_nilpotent():
    d = np.diag([0.3, -2.0, 1j])
    np.testing.assert_allclose(oracles.expm_taylor(d), np.diag(np.exp([0.3, -2.0, 1j])), atol=1e-14)
    n = np.array([[0, 5.0], [0, 0]])
    np.testing.assert_allclose(oracles.expm_taylor(n), [[1, 5], [0, 1]], atol=1e-13)


def test_expm_unitary_from_hermitian(rng):
    h = random_hermitian(rng, 4)
    w, v = np.linalg.eigh(h)
    ref = (v * np.exp(-1j * w)) @ v.conj().T
    np.testing.assert_allclose(oracles.expm_taylor(-1j * h), ref, atol=1e-12)


def test_superoperator_amplitude_damping():
    gamma, t = 1.5, 0.7
    rho = np.diag([1.0, 0.0]).astype(complex)
    out = oracles.evolve_by_superoperator(0.5 * SIGMA_Z, [SIGMA_MINUS], [[gamma]], rho, t)
    np.testing.assert_allclose(np.diag(out).real, [np.exp(-gamma * t), 1 - np.exp(-gamma * t)], atol=1e-13)


def test_charpoly_roots_of_diagonal():
    np.testing.assert_allclose(oracles.charpoly(np.diag([1.0, 2.0, 3.0])).real, [1, -6, 11, -6])
    np.testing.assert_allclose(oracles.hermitian_eigenvalues_by_bracketing(np.diag([3.0, -1.0, 0.5])),
                               [3, 0.5, -1], atol=1e-12)


def test_bruteforce_partial_trace_of_product(rng):
    a = np.diag([0.25, 0.75])
    b = np.diag([0.1, 0.2, 0.7])
    out = oracles.partial_trace_bruteforce(np.kron(a, b), (2, 3), (1,))
    np.testing.assert_allclose(out, b)


@pytest.mark.parametrize("u,expected", [(np.eye(4), 2.0)])
def test_reshuffle_defect_sum_identity(u, expected):
    assert oracles.reshuffle_defect_by_sum(u, 2) == pytest.approx(expected)
