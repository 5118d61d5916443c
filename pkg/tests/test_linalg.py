import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyncorr import oracles
from dyncorr.config import get_tolerances
from dyncorr.errors import (
    BadPermutation,
    BadSubsystemIndex,
    DimensionMismatch,
    InvariantViolation,
    NoConvergence,
    NotHermitian,
)
from dyncorr.linalg import (
    DensityMatrix,
    hermitian_eig,
    kron,
    partial_trace,
    permutation_unitary,
    permute_subsystems,
    tensor,
    trace_distance,
)

from helpers import random_density, random_hermitian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2)


# kron ------------------------------------------------------------------

def test_kron_identities():
    np.testing.assert_array_equal(kron(I2, I2), np.eye(4))
    np.testing.assert_array_equal(kron(SZ, I2), np.diag([1, 1, -1, -1]))


def test_kron_flips_both_qubits():
    ket00 = np.array([1, 0, 0, 0])
    np.testing.assert_array_equal(kron(SX, SX) @ ket00, [0, 0, 0, 1])


def test_kron_is_associative(rng):
    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    np.testing.assert_allclose(kron(a, b, c), np.kron(np.kron(a, b), c))


# eigensolver -------------------------------------------------------------

def test_eig_diagonal_sorted_descending():
    np.testing.assert_allclose(hermitian_eig(np.diag([3.0, 1.0, 2.0])).eigenvalues, [3, 2, 1])


def test_eig_pauli_x():
    np.testing.assert_allclose(hermitian_eig(SX).eigenvalues, [1, -1], atol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_eig_matches_charpoly_oracle(seed):
    h = random_hermitian(np.random.default_rng(seed), 4)
    ref = oracles.hermitian_eigenvalues_by_bracketing(h)
    assert np.max(np.abs(hermitian_eig(h).eigenvalues - ref)) < 1e-8


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16])
def test_eig_reconstructs(rng, n):
    h = random_hermitian(rng, n)
    spec = hermitian_eig(h)
    v, w = spec.eigenvectors, spec.eigenvalues
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=1e-11)


def test_eig_degenerate_spectrum(rng):
    u, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    h = u @ np.diag([1.0, 1.0, 1.0, -2.0]) @ u.conj().T
    np.testing.assert_allclose(hermitian_eig(h).eigenvalues, [1, 1, 1, -2], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_eig_reports_non_convergence(rng):
    tol = get_tolerances().replace(eig_max_sweeps=1, eig_offdiag=1e-300)
    with pytest.raises(NoConvergence):
        hermitian_eig(random_hermitian(rng, 6), tol)


# density matrices --------------------------------------------------------

def test_density_matrix_validation():
    with pytest.raises(InvariantViolation):
        DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(InvariantViolation):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvariantViolation):
        DensityMatrix(np.array([[0.5, 0.5], [0, 0.5]]))
    with pytest.raises(DimensionMismatch):
        DensityMatrix(np.eye(4) / 4, (3, 2))


def test_density_matrix_is_immutable():
    rho = DensityMatrix(np.eye(2) / 2)
    with pytest.raises(AttributeError):
        rho.dims = (1, 2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_pure_state_purity():
    rho = DensityMatrix.pure(np.array([1, 1j]) / np.sqrt(2))
    assert rho.purity() == pytest.approx(1.0)


# partial trace ------------------------------------------------------------

def test_partial_trace_of_product(rng):
    a = DensityMatrix(random_density(rng, 2))
    b = DensityMatrix(random_density(rng, 3))
    np.testing.assert_allclose(partial_trace(tensor(a, b), [0]).matrix, a.matrix, atol=1e-14)
    np.testing.assert_allclose(partial_trace(tensor(a, b), [1]).matrix, b.matrix, atol=1e-14)


def test_partial_trace_bell_marginal():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = DensityMatrix.pure(phi, (2, 2))
    np.testing.assert_allclose(partial_trace(rho, [0]).matrix, np.eye(2) / 2, atol=1e-15)


@pytest.mark.parametrize("dims,keep", [
    ((2, 2), (1,)), ((2, 3, 2), (0, 2)), ((3, 2, 2), (1,)), ((2, 2, 2, 2), (0, 2)),
    ((2, 2, 2, 2), (1, 3)), ((2, 3, 2), (0, 1, 2)),
])
def test_partial_trace_matches_bruteforce(rng, dims, keep):
    rho = DensityMatrix(random_density(rng, int(np.prod(dims))), dims)
    ref = oracles.partial_trace_bruteforce(rho.matrix, dims, keep)
    assert np.max(np.abs(partial_trace(rho, keep).matrix - ref)) < 1e-12


def test_partial_trace_bad_index():
    rho = DensityMatrix(np.eye(4) / 4, (2, 2))
    for keep in ([], [2], [-1]):
        with pytest.raises(BadSubsystemIndex):
            partial_trace(rho, keep)


# permutations --------------------------------------------------------------

def test_permute_identity_and_product(rng):
    states = [DensityMatrix(random_density(rng, 2)) for _ in range(4)]
    rho = tensor(*states)
    np.testing.assert_array_equal(permute_subsystems(rho, (0, 1, 2, 3)).matrix, rho.matrix)
    want = tensor(states[0], states[2], states[1], states[3])
    np.testing.assert_allclose(permute_subsystems(rho, (0, 2, 1, 3)).matrix, want.matrix, atol=1e-15)


def test_swap_permutation_is_involution(rng):
    rho = DensityMatrix(random_density(rng, 16), (2, 2, 2, 2))
    twice = permute_subsystems(permute_subsystems(rho, (0, 2, 1, 3)), (0, 2, 1, 3))
    np.testing.assert_array_equal(twice.matrix, rho.matrix)


def test_permutation_unitary_agrees_with_reshape(rng):
    dims = (2, 3, 2)
    rho = DensityMatrix(random_density(rng, 12), dims)
    perm = (2, 0, 1)
    p = permutation_unitary(dims, perm)
    np.testing.assert_allclose(p @ rho.matrix @ p.T, permute_subsystems(rho, perm).matrix, atol=1e-15)
    assert permute_subsystems(rho, perm).dims == (2, 2, 3)


def test_bad_permutation():
    rho = DensityMatrix(np.eye(4) / 4, (2, 2))
    for perm in ((0, 0), (0,), (1, 2)):
        with pytest.raises(BadPermutation):
            permute_subsystems(rho, perm)


# trace distance -------------------------------------------------------------

def test_trace_distance_examples():
    zero = DensityMatrix(np.diag([1.0, 0.0]))
    one = DensityMatrix(np.diag([0.0, 1.0]))
    mixed = DensityMatrix(np.eye(2) / 2)
    assert trace_distance(zero, zero) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(zero, one) == pytest.approx(1.0)
    assert trace_distance(mixed, zero) == pytest.approx(0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_trace_distance_is_a_bounded_metric(seed, n):
    rng = np.random.default_rng(seed)
    a, b, c = (DensityMatrix(random_density(rng, n)) for _ in range(3))
    ab, ba = trace_distance(a, b), trace_distance(b, a)
    assert 0 <= ab <= 1 + 1e-12
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12
