"""Independent reference computations used by the test-suite and ``dyncorr selftest``.

Nothing here is on a production path.  Each routine deliberately avoids the
code it is meant to check: the superoperator exponential never touches the
RK4 kernel, the eigenvalue oracle never touches Jacobi, and the partial
trace oracle is a plain index loop.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def superoperator(hamiltonian, jump_ops, rates) -> np.ndarray:
    """Row-major vectorised Lindblad generator, built term by term from the double sum.

    Uses vec(A X B) = (A kron B^T) vec(X) for row-major vec.
    """
    h = np.asarray(hamiltonian, dtype=np.complex128)
    n = h.shape[0]
    eye = np.eye(n)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for j, lj in enumerate(jump_ops):
        ljd = np.conj(lj).T
        for k, lk in enumerate(jump_ops):
            a = rates[j][k]
            if a == 0:
                continue
            prod = ljd @ lk
            sup = sup + a * (np.kron(lk, ljd.T) - 0.5 * np.kron(prod, eye) - 0.5 * np.kron(eye, prod.T))
    return sup


def expm_taylor(m, terms: int = 24) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a truncated Taylor series."""
    m = np.asarray(m, dtype=np.complex128)
    norm = float(np.max(np.sum(np.abs(m), axis=0))) if m.size else 0.0
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    a = m / (2.0 ** s)
    out = np.eye(m.shape[0], dtype=np.complex128)
    term = np.eye(m.shape[0], dtype=np.complex128)
    for k in range(1, terms + 1):
        term = term @ a / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def evolve_by_superoperator(hamiltonian, jump_ops, rates, rho0, t) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=np.complex128)
    n = rho0.shape[0]
    prop = expm_taylor(t * superoperator(hamiltonian, jump_ops, rates))
    return (prop @ rho0.reshape(-1)).reshape(n, n)


def choi_by_superoperator(hamiltonian, jump_ops, rates, t) -> np.ndarray:
    """Choi state of exp(tL) from the 256x256 (for two qubits) propagator of L x 1."""
    h = np.asarray(hamiltonian, dtype=np.complex128)
    d = h.shape[0]
    eye = np.eye(d)
    big_h = np.kron(h, eye)
    big_ops = [np.kron(np.asarray(op), eye) for op in jump_ops]
    phi = np.eye(d, dtype=np.complex128).reshape(-1) / math.sqrt(d)
    return evolve_by_superoperator(big_h, big_ops, rates, np.outer(phi, phi.conj()), t)


def charpoly(m) -> np.ndarray:
    """Characteristic polynomial coefficients (highest degree first) by Faddeev-LeVerrier."""
    m = np.asarray(m, dtype=np.complex128)
    n = m.shape[0]
    coeffs = [1.0 + 0j]
    mk = np.zeros_like(m)
    eye = np.eye(n)
    for k in range(1, n + 1):
        mk = m @ mk + coeffs[-1] * eye
        coeffs.append(-np.trace(m @ mk) / k)
    return np.array(coeffs)


def hermitian_eigenvalues_by_bracketing(m, grid_points: int = 20001) -> np.ndarray:
    """Real roots of the characteristic polynomial by sign-change scan plus bisection.

    Returned in descending order.  Assumes simple roots separated by more than
    the scan spacing, which holds for generic random matrices.
    """
    m = np.asarray(m, dtype=np.complex128)
    n = m.shape[0]
    c = charpoly(m).real

    def p(x):
        acc = 0.0
        for coef in c:
            acc = acc * x + coef
        return acc

    radius = max(float(np.sum(np.abs(m[i]))) for i in range(n)) + 1.0
    xs = np.linspace(-radius, radius, grid_points)
    vals = np.array([p(x) for x in xs])
    roots = []
    for i in range(grid_points - 1):
        a, b, fa, fb = xs[i], xs[i + 1], vals[i], vals[i + 1]
        if fb == 0.0:  # a grid-point root belongs to the interval it closes
            roots.append(b)
            continue
        if fa * fb > 0 or fa == 0.0:
            continue
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = p(mid)
            if fm == 0.0 or b - a < 1e-15 * max(1.0, abs(mid)):
                break
            if fa * fm < 0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b))
    return np.sort(np.array(roots))[::-1]


def partial_trace_bruteforce(matrix, dims, keep) -> np.ndarray:
    """Reduced matrix by explicit summation over every traced-out index tuple."""
    dims = list(dims)
    keep = sorted(keep)
    trace_out = [i for i in range(len(dims)) if i not in keep]
    kd = [dims[i] for i in keep]
    td = [dims[i] for i in trace_out]
    size = int(np.prod(kd))
    out = np.zeros((size, size), dtype=np.complex128)

    def flat(idx):
        f = 0
        for x, d in zip(idx, dims):
            f = f * d + x
        return f

    def kflat(idx):
        f = 0
        for x, d in zip(idx, kd):
            f = f * d + x
        return f

    for row_keep in itertools.product(*(range(d) for d in kd)):
        for col_keep in itertools.product(*(range(d) for d in kd)):
            acc = 0j
            for traced in itertools.product(*(range(d) for d in td)):
                row = [0] * len(dims)
                col = [0] * len(dims)
                for pos, i in enumerate(keep):
                    row[i] = row_keep[pos]
                    col[i] = col_keep[pos]
                for pos, i in enumerate(trace_out):
                    row[i] = traced[pos]
                    col[i] = traced[pos]
                acc += matrix[flat(row), flat(col)]
            out[kflat(row_keep), kflat(col_keep)] = acc
    return out


def reshuffle_defect_by_sum(u, d: int) -> float:
    """max |sum_ij <ki|U|mj><nj|U^+|li> - delta_kl delta_mn| by direct summation."""
    u = np.asarray(u, dtype=np.complex128)
    ud = u.conj().T
    worst = 0.0
    for k, l, m, n in itertools.product(range(d), repeat=4):
        acc = 0j
        for i in range(d):
            for j in range(d):
                acc += u[k * d + i, m * d + j] * ud[n * d + j, l * d + i]
        target = 1.0 if (k == l and m == n) else 0.0
        worst = max(worst, abs(acc - target))
    return worst
