"""Random-state generators shared by the tests."""
import numpy as np


def random_density(rng, n, rank=None):
    rank = rank or n
    z = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = z @ z.conj().T
    return m / np.trace(m).real


def random_hermitian(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return z + z.conj().T
