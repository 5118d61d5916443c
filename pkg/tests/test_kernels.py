import os
import subprocess
import sys

import numpy as np
import pytest

from dyncorr import _kernels
from dyncorr.channels import max_entangled_state
from dyncorr.models import TwoAtomParams, ZZThermalParams, two_atom_generator, zz_thermal_generator

from helpers import random_hermitian

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _sorted(w):
    return np.sort(np.asarray(w))


@pytest.mark.parametrize("n", [2, 4, 7, 16])
def test_jacobi_numpy_reconstructs(rng, n):
    h = random_hermitian(rng, n)
    w, v, sweeps, ok = _kernels.jacobi_eigh_numpy(h.copy(), 1e-12, 100)
    assert ok and sweeps <= 20
    np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=1e-11)


def test_jacobi_diagonal_needs_no_sweeps():
    w, v, sweeps, ok = _kernels.jacobi_eigh_numpy(np.diag([3.0, 1.0, 2.0]).astype(complex), 1e-12, 100)
    assert ok and sweeps == 0
    np.testing.assert_array_equal(w, [3, 1, 2])


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_jacobi_parity(seed):
    h = random_hermitian(np.random.default_rng(seed), 8)
    w1, _, s1, ok1 = _kernels.jacobi_eigh_numpy(h.copy(), 1e-12, 100)
    w2, _, s2, ok2 = _kernels.jacobi_eigh_numba(h.copy(), 1e-12, 100)
    assert ok1 and ok2 and s1 == s2
    np.testing.assert_allclose(_sorted(w1), _sorted(w2), atol=1e-12)


@needs_numba
@pytest.mark.parametrize("gen", [
    two_atom_generator(TwoAtomParams(r=0.4)),
    zz_thermal_generator(ZZThermalParams(T=0.9)),
], ids=["two-atom", "zz-thermal"])
def test_integrator_parity(gen):
    ext = gen.extend(4)
    heff, ms = ext.effective_operators
    rho0 = max_entangled_state(4, (2, 2)).matrix
    times = np.array([0.01, 0.2, 1.5])
    args = (rho0, heff, ms, times, 1e-4, 1e-10, 1e-13, 10**6)
    s1, a1, _, st1, _ = _kernels.integrate_numpy(*args)
    s2, a2, _, st2, _ = _kernels.integrate_numba(*args)
    assert st1 == st2 == _kernels.OK and a1 == a2
    assert np.max(np.abs(s1 - s2)) < 1e-12


def test_integrator_step_limit_status():
    heff = np.zeros((2, 2), complex)
    ms = np.zeros((1, 2, 2), complex)
    out = _kernels.integrate(np.eye(2, dtype=complex) / 2, heff, ms, np.array([10.0]), 1e-3, 1e-9, 1e-12, 3)
    assert out[3] == _kernels.STEP_LIMIT and out[4] < 10.0


def test_backend_selection(monkeypatch):
    assert _kernels.select_backend("numpy") == "numpy"
    monkeypatch.setenv(_kernels.KERNELS_ENV, "fortran")
    with pytest.raises(ValueError):
        _kernels.select_backend()


def test_numpy_backend_via_env(tmp_path):
    env = dict(os.environ, DYNCORR_KERNELS="numpy")
    code = "from dyncorr import _kernels; print(_kernels.BACKEND, _kernels.integrate is _kernels.integrate_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]
