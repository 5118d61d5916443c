"""Lindblad generators with a rate matrix and their adaptive RK4 evolution.

The generator is

    L(rho) = -i[H, rho] + sum_jk a_jk (L_k rho L_j^+ - 1/2 {L_j^+ L_k, rho})

For integration it is rewritten once as ``-i(H_eff rho - rho H_eff^+) +
sum_m M_m rho M_m^+`` using the eigen-decomposition of ``a``; the stepping
itself lives in :mod:`dyncorr._kernels`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .channels import max_entangled_state
from .config import get_tolerances
from .errors import (
    DimensionMismatch,
    InvariantViolation,
    PositivityLoss,
    StepLimitExceeded,
    TraceDrift,
)
from .linalg import DensityMatrix, as_matrix, eigvalsh, hermitian_eig, hermiticity_defect


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    hamiltonian: np.ndarray
    jump_ops: tuple
    rates: np.ndarray

    def __post_init__(self):
        tol = get_tolerances()
        h = as_matrix(self.hamiltonian)
        n = h.shape[0]
        if h.shape != (n, n):
            raise DimensionMismatch(f"Hamiltonian must be square, got {h.shape}")
        if hermiticity_defect(h) > tol.hermitian:
            raise InvariantViolation("Hamiltonian is not Hermitian")
        ops = tuple(as_matrix(op) for op in self.jump_ops)
        for op in ops:
            if op.shape != (n, n):
                raise DimensionMismatch(f"jump operator shape {op.shape} != ({n}, {n})")
        a = np.asarray(self.rates, dtype=np.complex128).reshape(len(ops), len(ops)) if ops \
            else np.zeros((0, 0), dtype=np.complex128)
        if ops:
            if hermiticity_defect(a) > tol.hermitian:
                raise InvariantViolation("rate matrix is not Hermitian")
            lam_min = eigvalsh(a)[-1]
            if lam_min < -tol.psd:
                raise InvariantViolation(f"rate matrix not PSD (min eigenvalue {lam_min:.3e})")
        for arr in (h, a, *ops):
            arr.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jump_ops", ops)
        object.__setattr__(self, "rates", a)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def extend(self, d_aux: int) -> "LindbladGenerator":
        """Same generator acting as L x 1 on a system with an appended ancilla."""
        eye = np.eye(d_aux)
        return LindbladGenerator(
            np.kron(self.hamiltonian, eye),
            tuple(np.kron(op, eye) for op in self.jump_ops),
            self.rates,
        )

    @cached_property
    def effective_operators(self) -> tuple:
        """(H_eff, M) with M stacked as an (m, n, n) array."""
        n = self.dim
        heff = self.hamiltonian.astype(np.complex128)
        ms = []
        if self.jump_ops:
            ops = np.stack(self.jump_ops)
            anti = np.einsum("jk,jba,kbc->ac", self.rates, ops.conj(), ops)
            heff = heff - 0.5j * anti
            spec = hermitian_eig(self.rates)
            for lam, u in zip(spec.eigenvalues, spec.eigenvectors.T):
                if lam <= 0.0:
                    continue
                ms.append(math.sqrt(lam) * np.einsum("k,kab->ab", u.conj(), ops))
        if not ms:
            ms.append(np.zeros((n, n), dtype=np.complex128))
        return np.ascontiguousarray(heff), np.ascontiguousarray(np.stack(ms))

    @cached_property
    def rate_scale(self) -> float:
        scale = float(np.max(np.abs(eigvalsh(self.hamiltonian)))) if self.dim else 0.0
        if self.jump_ops:
            norms = max(float(np.max(np.abs(op))) for op in self.jump_ops) ** 2
            scale = max(scale, float(np.max(np.abs(eigvalsh(self.rates)))) * norms)
        return max(scale, 1.0)


def lindblad_rhs(gen: LindbladGenerator, rho) -> np.ndarray:
    """Direct double-sum evaluation of the generator on ``rho``."""
    r = as_matrix(rho)
    if r.shape != gen.hamiltonian.shape:
        raise DimensionMismatch(f"state shape {r.shape} != generator dim {gen.dim}")
    h = gen.hamiltonian
    out = -1j * (h @ r - r @ h)
    ops = gen.jump_ops
    for j, lj in enumerate(ops):
        ljd = lj.conj().T
        for k, lk in enumerate(ops):
            a = gen.rates[j, k]
            if a == 0:
                continue
            prod = ljd @ lk
            out += a * (lk @ r @ ljd - 0.5 * (prod @ r + r @ prod))
    return out


@dataclass(frozen=True)
class EvolutionConfig:
    t_final: float = 0.0
    rel_tol: float = field(default_factory=lambda: get_tolerances().evolve_rel)
    abs_tol: float = field(default_factory=lambda: get_tolerances().evolve_abs)
    max_steps: int = field(default_factory=lambda: get_tolerances().evolve_max_steps)
    initial_step: float | None = None

    def __post_init__(self):
        if not self.t_final >= 0:
            raise ValueError(f"t_final must be >= 0, got {self.t_final}")
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_steps > 0):
            raise ValueError("tolerances and max_steps must be positive")


@dataclass
class TrajectoryStats:
    """Worst-case validity figures of raw (pre-projection) checkpoint states."""

    checkpoints: int = 0
    max_trace_drift: float = 0.0
    max_hermiticity_defect: float = 0.0
    min_eigenvalue: float = math.inf
    steps: int = 0

    def update(self, drift, herm, lam_min):
        self.checkpoints += 1
        self.max_trace_drift = max(self.max_trace_drift, drift)
        self.max_hermiticity_defect = max(self.max_hermiticity_defect, herm)
        self.min_eigenvalue = min(self.min_eigenvalue, lam_min)


def _finalise(m: np.ndarray, dims, t: float, stats: TrajectoryStats | None) -> DensityMatrix:
    tol = get_tolerances()
    tr = np.trace(m).real
    drift = abs(tr - 1.0)
    if drift > tol.trace_drift:
        raise TraceDrift(f"trace drifted to {tr:.12g}", time=t)
    herm = hermiticity_defect(m)
    m = 0.5 * (m + m.conj().T)
    m = m / np.trace(m).real
    spec = hermitian_eig(m)
    lam = spec.eigenvalues
    if stats is not None:
        stats.update(drift, herm, float(lam[-1]))
    if lam[-1] < -tol.positivity:
        raise PositivityLoss(f"minimum eigenvalue {lam[-1]:.3e}", time=t)
    if lam[-1] < 0.0:
        # integration noise on rank-deficient states; project back onto the PSD cone
        v = spec.eigenvectors
        lam = np.clip(lam, 0.0, None)
        m = (v * lam) @ v.conj().T
        m = 0.5 * (m + m.conj().T)
        m = m / np.trace(m).real
    return DensityMatrix(m, dims, validate=False)


def evolve_checkpoints(gen: LindbladGenerator, rho0: DensityMatrix, times: Sequence[float],
                       cfg: EvolutionConfig | None = None,
                       stats: TrajectoryStats | None = None) -> list:
    """States along a single trajectory at each of the ascending ``times``.

    Each checkpoint is re-Hermitised, trace-checked and positivity-checked
    (recording the raw figures into ``stats`` if given); eigenvalues in
    ``[-positivity, 0)`` are clipped.  The trajectory itself continues from the
    raw integrator state.
    """
    cfg = cfg or EvolutionConfig()
    if rho0.dim != gen.dim:
        raise DimensionMismatch(f"state dim {rho0.dim} != generator dim {gen.dim}")
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        return []
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("checkpoint times must be non-negative and ascending")
    heff, ms = gen.effective_operators
    h0 = cfg.initial_step or 1e-3 / gen.rate_scale
    states, attempts, _, status, t_reached = _kernels.integrate(
        rho0.matrix, heff, ms, times, h0, cfg.rel_tol, cfg.abs_tol, cfg.max_steps)
    if status != _kernels.OK:
        why = "step limit" if status == _kernels.STEP_LIMIT else "step size underflow"
        raise StepLimitExceeded(f"integration stopped after {attempts} steps ({why})",
                                time=float(t_reached))
    if stats is not None:
        stats.steps += int(attempts)
    return [_finalise(s, rho0.dims, float(t), stats) for s, t in zip(states, times)]


def evolve(gen: LindbladGenerator, rho0: DensityMatrix, cfg: EvolutionConfig) -> DensityMatrix:
    """rho(t_final) under ``gen``."""
    if cfg.t_final == 0:
        return rho0
    return evolve_checkpoints(gen, rho0, [cfg.t_final], cfg)[0]


def _split_dims(d: int, dims) -> tuple:
    if dims is not None:
        dims = tuple(int(x) for x in dims)
        if int(np.prod(dims)) != d:
            raise DimensionMismatch(f"dims {dims} do not multiply to {d}")
        return dims
    root = math.isqrt(d)
    return (root, root) if root * root == d else (d,)


def evolve_choi_checkpoints(gen: LindbladGenerator, times: Sequence[float],
                            cfg: EvolutionConfig | None = None, dims=None,
                            stats: TrajectoryStats | None = None) -> list:
    """Choi states of exp(t L) at each time, from one trajectory of L x 1."""
    sub = _split_dims(gen.dim, dims)
    rho0 = max_entangled_state(gen.dim, sub)
    return evolve_checkpoints(gen.extend(gen.dim), rho0, times, cfg, stats)


def evolve_choi(gen: LindbladGenerator, cfg: EvolutionConfig, dims=None) -> DensityMatrix:
    """Choi state of exp(t_final L); ``dims`` defaults to an equal split of d_S."""
    sub = _split_dims(gen.dim, dims)
    if cfg.t_final == 0:
        return max_entangled_state(gen.dim, sub)
    return evolve_choi_checkpoints(gen, [cfg.t_final], cfg, sub)[0]
