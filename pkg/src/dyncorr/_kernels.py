"""Hot numeric kernels: cyclic complex Jacobi and adaptive RK4 Lindblad stepping.

Each kernel exists twice, a numba ``@njit`` version and a pure-numpy version
with the same signature and algorithm.  The set bound at import time is chosen
by the ``DYNCORR_KERNELS`` environment variable:

* ``numba`` (default when numba imports cleanly)
* ``numpy``

Both paths are always importable as ``jacobi_eigh_numpy`` / ``jacobi_eigh_numba``
and ``integrate_numpy`` / ``integrate_numba`` so tests and the benchmark can
compare them directly.
"""
from __future__ import annotations

import math
import os

import numpy as np

KERNELS_ENV = "DYNCORR_KERNELS"

# integrate() status codes
OK = 0
STEP_LIMIT = 1
STEP_UNDERFLOW = 2

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------

def _offdiag_norm(a):
    n = a.shape[0]
    s = 0.0
    for p in range(n):
        for q in range(p + 1, n):
            z = a[p, q]
            s += z.real * z.real + z.imag * z.imag
    return math.sqrt(2.0 * s)


def _rotation_py(app, aqq, apq):
    """Return (c, s, e) annihilating ``apq``; e is the unit phase of apq."""
    g = abs(apq)
    e = apq / g
    theta = (aqq - app) / (2.0 * g)
    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    return c, t * c, e


_rotation = _rotation_py


def jacobi_eigh_numpy(m, tol, max_sweeps):
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps, converged)``; eigenvalues are
    unsorted (diagonal order) and eigenvectors are the columns of the
    accumulated rotation.
    """
    a = np.array(m, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.sqrt(np.sum(np.abs(a) ** 2))))
    threshold = tol * scale
    sweeps = 0
    iu = np.triu_indices(n, 1)
    while True:
        off = math.sqrt(2.0 * float(np.sum(np.abs(a[iu]) ** 2)))
        if off < threshold:
            return a.diagonal().real.copy(), v, sweeps, True
        if sweeps >= max_sweeps:
            return a.diagonal().real.copy(), v, sweeps, False
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                c, s, e = _rotation_py(a[p, p].real, a[q, q].real, apq)
                se, sec = s * e, s * e.conjugate()
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - sec * a[:, q]
                a[:, q] = se * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - se * a[q, :]
                a[q, :] = sec * row_p + c * a[q, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                v[:, p] = c * vp - sec * v[:, q]
                v[:, q] = se * vp + c * v[:, q]


def _jacobi_eigh_loops(m, tol, max_sweeps):
    a = m.astype(np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            z = a[i, j]
            fro += z.real * z.real + z.imag * z.imag
    threshold = tol * max(1.0, math.sqrt(fro))
    sweeps = 0
    while True:
        if _offdiag_norm(a) < threshold:
            break
        if sweeps >= max_sweeps:
            w = np.empty(n)
            for i in range(n):
                w[i] = a[i, i].real
            return w, v, sweeps, False
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                c, s, e = _rotation(a[p, p].real, a[q, q].real, apq)
                se = s * e
                sec = s * e.conjugate()
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - sec * aiq
                    a[i, q] = se * aip + c * aiq
                for j in range(n):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = c * apj - se * aqj
                    a[q, j] = sec * apj + c * aqj
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - sec * viq
                    v[i, q] = se * vip + c * viq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps, True


# ---------------------------------------------------------------------------
# Adaptive RK4 (step doubling) for  drho/dt = -i(H rho - rho H^+) + sum M rho M^+
# ---------------------------------------------------------------------------

def _rhs_numpy(rho, heff, heff_dag, ms, ms_dag):
    out = -1j * (heff @ rho - rho @ heff_dag)
    for k in range(ms.shape[0]):
        out += ms[k] @ rho @ ms_dag[k]
    return out


def _rk4_pair(f, rho, k1, h, *ops):
    """One full RK4 step and two half steps sharing the first stage."""
    k2 = f(rho + 0.5 * h * k1, *ops)
    k3 = f(rho + 0.5 * h * k2, *ops)
    k4 = f(rho + h * k3, *ops)
    full = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    hh = 0.5 * h
    k2 = f(rho + 0.5 * hh * k1, *ops)
    k3 = f(rho + 0.5 * hh * k2, *ops)
    k4 = f(rho + hh * k3, *ops)
    mid = rho + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    j1 = f(mid, *ops)
    k2 = f(mid + 0.5 * hh * j1, *ops)
    k3 = f(mid + 0.5 * hh * k2, *ops)
    k4 = f(mid + hh * k3, *ops)
    two_half = mid + (hh / 6.0) * (j1 + 2.0 * k2 + 2.0 * k3 + k4)
    return full, two_half


def _integrate_impl(rhs, rk4_pair, rho0, heff, heff_dag, ms, ms_dag, times, h0, rtol, atol, max_steps):
    n = rho0.shape[0]
    nt = times.shape[0]
    out = np.zeros((nt, n, n), dtype=np.complex128)
    rho = rho0.copy()
    t = 0.0
    h = h0
    attempts = 0
    for idx in range(nt):
        target = times[idx]
        while t < target:
            remaining = target - t
            last = h >= remaining
            hs = remaining if last else h
            k1 = rhs(rho, heff, heff_dag, ms, ms_dag)
            full, two_half = rk4_pair(rhs, rho, k1, hs, heff, heff_dag, ms, ms_dag)
            attempts += 1
            err = np.max(np.abs(two_half - full)) / 15.0
            scale = atol + rtol * np.max(np.abs(rho))
            if err <= scale:
                rho = two_half
                t = target if last else t + hs
                if err * 32.0 < scale and not last:
                    h = 2.0 * hs
            else:
                h = 0.5 * hs
                if h < 1e-15 * max(1.0, target):
                    return out, attempts, h, STEP_UNDERFLOW, t
            if attempts >= max_steps and t < target:
                return out, attempts, h, STEP_LIMIT, t
        out[idx] = rho
    return out, attempts, h, OK, t


def integrate_numpy(rho0, heff, ms, times, h0, rtol, atol, max_steps):
    """Evolve ``rho0`` and return its value at each of the ascending ``times``.

    Returns ``(states, attempts, last_step, status, t_reached)``.
    """
    heff = np.ascontiguousarray(heff, dtype=np.complex128)
    ms = np.ascontiguousarray(ms, dtype=np.complex128).reshape(-1, *heff.shape)
    heff_dag = np.ascontiguousarray(heff.conj().T)
    ms_dag = np.ascontiguousarray(np.conj(np.transpose(ms, (0, 2, 1))))
    return _integrate_impl(
        _rhs_numpy, _rk4_pair, np.asarray(rho0, dtype=np.complex128),
        heff, heff_dag, ms, ms_dag, np.asarray(times, dtype=np.float64),
        float(h0), float(rtol), float(atol), int(max_steps))


if HAVE_NUMBA:
    # globals resolved by numba at compile time must themselves be jitted
    _offdiag_norm = njit(cache=True)(_offdiag_norm)
    _rotation = njit(cache=True)(_rotation_py)
    jacobi_eigh_numba = njit(cache=True)(_jacobi_eigh_loops)

    @njit(cache=True)
    def _rhs_nb(rho, heff, heff_dag, ms, ms_dag):
        out = -1j * (heff @ rho - rho @ heff_dag)
        for k in range(ms.shape[0]):
            out += ms[k] @ rho @ ms_dag[k]
        return out

    @njit(cache=True)
    def _rk4_pair_nb(rho, k1, h, heff, heff_dag, ms, ms_dag):
        k2 = _rhs_nb(rho + 0.5 * h * k1, heff, heff_dag, ms, ms_dag)
        k3 = _rhs_nb(rho + 0.5 * h * k2, heff, heff_dag, ms, ms_dag)
        k4 = _rhs_nb(rho + h * k3, heff, heff_dag, ms, ms_dag)
        full = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        hh = 0.5 * h
        k2 = _rhs_nb(rho + 0.5 * hh * k1, heff, heff_dag, ms, ms_dag)
        k3 = _rhs_nb(rho + 0.5 * hh * k2, heff, heff_dag, ms, ms_dag)
        k4 = _rhs_nb(rho + hh * k3, heff, heff_dag, ms, ms_dag)
        mid = rho + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        j1 = _rhs_nb(mid, heff, heff_dag, ms, ms_dag)
        k2 = _rhs_nb(mid + 0.5 * hh * j1, heff, heff_dag, ms, ms_dag)
        k3 = _rhs_nb(mid + 0.5 * hh * k2, heff, heff_dag, ms, ms_dag)
        k4 = _rhs_nb(mid + hh * k3, heff, heff_dag, ms, ms_dag)
        two_half = mid + (hh / 6.0) * (j1 + 2.0 * k2 + 2.0 * k3 + k4)
        return full, two_half

    # a separate copy of the loop: dispatchers passed as arguments defeat the on-disk cache
    @njit(cache=True)
    def _integrate_nb_impl(rho0, heff, heff_dag, ms, ms_dag, times, h0, rtol, atol, max_steps):
        n = rho0.shape[0]
        nt = times.shape[0]
        out = np.zeros((nt, n, n), dtype=np.complex128)
        rho = rho0.copy()
        t = 0.0
        h = h0
        attempts = 0
        for idx in range(nt):
            target = times[idx]
            while t < target:
                remaining = target - t
                last = h >= remaining
                hs = remaining if last else h
                k1 = _rhs_nb(rho, heff, heff_dag, ms, ms_dag)
                full, two_half = _rk4_pair_nb(rho, k1, hs, heff, heff_dag, ms, ms_dag)
                attempts += 1
                err = np.max(np.abs(two_half - full)) / 15.0
                scale = atol + rtol * np.max(np.abs(rho))
                if err <= scale:
                    rho = two_half
                    t = target if last else t + hs
                    if err * 32.0 < scale and not last:
                        h = 2.0 * hs
                else:
                    h = 0.5 * hs
                    if h < 1e-15 * max(1.0, target):
                        return out, attempts, h, STEP_UNDERFLOW, t
                if attempts >= max_steps and t < target:
                    return out, attempts, h, STEP_LIMIT, t
            out[idx] = rho
        return out, attempts, h, OK, t

    def integrate_numba(rho0, heff, ms, times, h0, rtol, atol, max_steps):
        heff = np.ascontiguousarray(heff, dtype=np.complex128)
        ms = np.ascontiguousarray(ms, dtype=np.complex128).reshape(-1, *heff.shape)
        heff_dag = np.ascontiguousarray(heff.conj().T)
        ms_dag = np.ascontiguousarray(np.conj(np.transpose(ms, (0, 2, 1))))
        return _integrate_nb_impl(
            np.ascontiguousarray(rho0, dtype=np.complex128),
            heff, heff_dag, ms, ms_dag,
            np.ascontiguousarray(times, dtype=np.float64),
            float(h0), float(rtol), float(atol), int(max_steps))
else:  # pragma: no cover
    jacobi_eigh_numba = None
    integrate_numba = None


def select_backend(name=None):
    name = (name or os.environ.get(KERNELS_ENV) or ("numba" if HAVE_NUMBA else "numpy")).lower()
    if name == "numba" and HAVE_NUMBA:
        return "numba"
    if name in ("numpy", "numba"):
        return "numpy"
    raise ValueError(f"{KERNELS_ENV}={name!r}; expected 'numba' or 'numpy'")


BACKEND = select_backend()

if BACKEND == "numba":
    jacobi_eigh = jacobi_eigh_numba
    integrate = integrate_numba
else:
    jacobi_eigh = jacobi_eigh_numpy
    integrate = integrate_numpy
