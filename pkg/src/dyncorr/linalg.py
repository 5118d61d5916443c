"""Dense complex linear algebra on tagged density matrices.

Matrices are plain ``complex128`` numpy arrays.  Composite indices over
subsystems ``(s0, s1, ...)`` are lexicographic (row-major), so a state on
``A, B, A', B'`` reshapes to ``(dA, dB, dA, dB, dA, dB, dA, dB)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .config import get_tolerances
from .errors import (
    BadPermutation,
    BadSubsystemIndex,
    DimensionMismatch,
    InvariantViolation,
    NoConvergence,
    NotHermitian,
)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition with eigenvalues in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


def hermitian_eig(m, tol=None) -> Spectrum:
    """Full spectrum of a Hermitian matrix by cyclic Jacobi rotations.

    Raises :class:`NotHermitian` if ``max|m - m^+|`` exceeds the Hermiticity
    tolerance and :class:`NoConvergence` if the off-diagonal norm is still
    above threshold after the configured number of sweeps.
    """
    tol = tol or get_tolerances()
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    defect = hermiticity_defect(a)
    if defect > tol.hermitian:
        raise NotHermitian(f"Hermiticity defect {defect:.3e} > {tol.hermitian:g}")
    a = 0.5 * (a + a.conj().T)
    w, v, sweeps, converged = _kernels.jacobi_eigh(
        np.ascontiguousarray(a), tol.eig_offdiag, tol.eig_max_sweeps)
    if not converged:
        raise NoConvergence(f"Jacobi did not converge in {sweeps} sweeps")
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], np.ascontiguousarray(v[:, order]), sweeps)


def eigvalsh(m, tol=None) -> np.ndarray:
    return hermitian_eig(m, tol).eigenvalues


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = np.kron(out, as_matrix(m))
    return out


def _check_dims(dims: Sequence[int], size: int) -> tuple:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or int(np.prod(dims)) != size:
        raise DimensionMismatch(f"subsystem dims {dims} do not multiply to {size}")
    return dims


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix with subsystem dims.

    Construction validates the invariants against the active tolerance record
    unless ``validate=False`` (used internally where a caller has already
    checked them).
    """

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims: Sequence[int] | None = None, *, validate=True):
        m = as_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", _check_dims(dims or (m.shape[0],), m.shape[0]))
        if validate:
            self.check()

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, dims={list(self.dims)})"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self, tol=None) -> "DensityMatrix":
        tol = tol or get_tolerances()
        herm = hermiticity_defect(self.matrix)
        if herm > tol.hermitian:
            raise InvariantViolation(f"Hermiticity defect {herm:.3e}")
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > tol.trace:
            raise InvariantViolation(f"trace {tr.real:.12g} differs from 1")
        lam = eigvalsh(self.matrix, tol)[-1]
        if lam < -tol.psd:
            raise InvariantViolation(f"minimum eigenvalue {lam:.3e} is negative")
        return self

    def with_dims(self, dims: Sequence[int]) -> "DensityMatrix":
        return DensityMatrix(self.matrix, dims, validate=False)

    @classmethod
    def pure(cls, psi, dims=None) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims, validate=False)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


def tensor(*states: DensityMatrix) -> DensityMatrix:
    """Tensor product of density matrices; subsystem lists are concatenated."""
    dims = tuple(d for s in states for d in s.dims)
    return DensityMatrix(kron(*(s.matrix for s in states)), dims, validate=False)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduce ``rho`` to the subsystems in ``keep`` (kept in original order)."""
    dims = rho.dims
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise BadSubsystemIndex(f"keep={keep} invalid for {n} subsystems")
    drop = [i for i in range(n) if i not in keep]
    t = rho.matrix.reshape(dims + dims)
    # contract each dropped pair of (row, column) axes
    for removed, i in enumerate(drop):
        axis = i - removed
        nleft = n - removed
        t = np.trace(t, axis1=axis, axis2=axis + nleft)
    kd = tuple(dims[i] for i in keep)
    size = int(np.prod(kd))
    return DensityMatrix(t.reshape(size, size), kd, validate=False)


def _check_perm(perm, n) -> tuple:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise BadPermutation(f"{perm} is not a permutation of {n} subsystems")
    return perm


def permutation_unitary(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary P with P|s0 s1 ...> = |s_perm[0] s_perm[1] ...>.

    New subsystem ``k`` is old subsystem ``perm[k]``.
    """
    dims = tuple(dims)
    perm = _check_perm(perm, len(dims))
    size = int(np.prod(dims))
    idx = np.arange(size).reshape(dims).transpose(perm).ravel()
    p = np.zeros((size, size), dtype=np.complex128)
    p[np.arange(size), idx] = 1.0
    return p


def permute_subsystems(rho: DensityMatrix, perm: Sequence[int]) -> DensityMatrix:
    """Reorder subsystems: new subsystem ``k`` is old subsystem ``perm[k]``."""
    dims = rho.dims
    n = len(dims)
    perm = _check_perm(perm, n)
    t = rho.matrix.reshape(dims + dims)
    axes = list(perm) + [n + p for p in perm]
    nd = tuple(dims[p] for p in perm)
    return DensityMatrix(t.transpose(axes).reshape(rho.dim, rho.dim), nd, validate=False)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of ``a - b``."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    lam = eigvalsh(a.matrix - b.matrix)
    return float(0.5 * np.sum(np.abs(lam)))


def inverse_sqrt_psd(m, floor=1e-14) -> np.ndarray:
    """``m^{-1/2}`` of a positive definite Hermitian matrix via its spectrum."""
    spec = hermitian_eig(m)
    lam = spec.eigenvalues
    if lam[-1] <= floor:
        raise InvariantViolation(f"matrix is singular (min eigenvalue {lam[-1]:.3e})")
    v = spec.eigenvectors
    return (v * (1.0 / np.sqrt(lam))) @ v.conj().T
