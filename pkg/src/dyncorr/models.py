"""The two physical two-qubit models and the analytic asymptotic channel.

Qubit basis order is (|e>, |g>): index 0 is the excited state, so
``sigma_minus = |g><e|`` has its single 1 in the lower-left corner.
Units: omega = 1 fixes time and energy (hbar = c = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import Channel, tensor_channels
from .lindblad import LindbladGenerator

SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
EYE2 = np.eye(2, dtype=np.complex128)

EXCITED = np.array([1, 0], dtype=np.complex128)
GROUND = np.array([0, 1], dtype=np.complex128)

# below this the closed forms lose digits to cancellation (j2 error ~ eps / x^3)
SERIES_CUTOFF = 0.5
SERIES_TERMS = 12


def on_qubit(op: np.ndarray, j: int) -> np.ndarray:
    """Embed a single-qubit operator on qubit ``j`` (0 or 1) of a pair."""
    return np.kron(op, EYE2) if j == 0 else np.kron(EYE2, op)


def _bessel_series(n: int, x: float) -> float:
    """sum_k (-1)^k x^(2k+n) / (2^k k! (2k+2n+1)!!)"""
    term = x**n / math.prod(range(2 * n + 1, 0, -2))
    total = term
    for k in range(1, SERIES_TERMS):
        term *= -x * x / (2.0 * k * (2 * k + 2 * n + 1))
        total += term
    return total


def spherical_bessel_j0(x: float) -> float:
    if x < SERIES_CUTOFF:
        return _bessel_series(0, x)
    return math.sin(x) / x


def spherical_bessel_j2(x: float) -> float:
    if x < SERIES_CUTOFF:
        return _bessel_series(2, x)
    return (3.0 / x**3 - 1.0 / x) * math.sin(x) - 3.0 / x**2 * math.cos(x)


def legendre_p2(c: float) -> float:
    return 0.5 * (3.0 * c * c - 1.0)


@dataclass(frozen=True)
class TwoAtomParams:
    r: float = 0.0
    omega: float = 1.0
    dipole_norm: float = 2.0
    theta: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not self.r >= 0:
            raise ValueError("r must be non-negative")
        if not self.dipole_norm > 0:
            raise ValueError("dipole_norm must be positive")

    @property
    def gamma0(self) -> float:
        """Single-atom decay rate (4/3) omega^3 |d|^2."""
        return 4.0 / 3.0 * self.omega**3 * self.dipole_norm**2


def two_atom_rates(p: TwoAtomParams) -> np.ndarray:
    """Symmetric 2x2 rate matrix a_jk = gamma0 [j0(x) + P2(cos theta) j2(x)], x = omega r."""
    g = p.gamma0
    x = p.omega * p.r
    off = g * (spherical_bessel_j0(x) + legendre_p2(math.cos(p.theta)) * spherical_bessel_j2(x))
    return np.array([[g, off], [off, g]])


def two_atom_generator(p: TwoAtomParams) -> LindbladGenerator:
    h = 0.5 * p.omega * (on_qubit(SIGMA_Z, 0) + on_qubit(SIGMA_Z, 1))
    jumps = (on_qubit(SIGMA_MINUS, 0), on_qubit(SIGMA_MINUS, 1))
    return LindbladGenerator(h, jumps, two_atom_rates(p))


def amplitude_damper() -> Channel:
    """Complete decay to |g>: Kraus K1 = [[0,0],[1,0]], K2 = [[0,0],[0,1]]."""
    k1 = np.array([[0, 0], [1, 0]], dtype=np.complex128)
    k2 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
    return Channel.kraus([k1, k2])


def two_atom_asymptotic_channel() -> Channel:
    """t -> infinity limit of the two-atom map for r > 0 (product of dampers)."""
    e = amplitude_damper()
    return tensor_channels(e, e)


@dataclass(frozen=True)
class ZZThermalParams:
    J: float = 1.0
    gamma0: float = 4.0 / 3.0
    T: float = 0.0
    omega: float = 1.0
    include_local_hamiltonian: bool = True

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        if not self.T >= 0:
            raise ValueError("T must be non-negative")
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def n_bar(self) -> float:
        return bose_occupation(self.omega, self.T)


def bose_occupation(omega: float, T: float) -> float:
    """[exp(omega/T) - 1]^-1, taken as 0 for T < 1e-6 omega."""
    if T < 1e-6 * omega:
        return 0.0
    x = omega / T
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def zz_thermal_generator(p: ZZThermalParams) -> LindbladGenerator:
    """ZZ-coupled qubits, each in its own thermal bath.

    With ``include_local_hamiltonian=False`` the free term (omega/2)(Z1 + Z2)
    is dropped, leaving only the error dynamics.
    """
    h = p.J * np.kron(SIGMA_Z, SIGMA_Z)
    if p.include_local_hamiltonian:
        h = h + 0.5 * p.omega * (on_qubit(SIGMA_Z, 0) + on_qubit(SIGMA_Z, 1))
    n = p.n_bar
    jumps = (on_qubit(SIGMA_MINUS, 0), on_qubit(SIGMA_MINUS, 1),
             on_qubit(SIGMA_PLUS, 0), on_qubit(SIGMA_PLUS, 1))
    down = p.gamma0 * (n + 1.0)
    up = p.gamma0 * n
    return LindbladGenerator(h, jumps, np.diag([down, down, up, up]))
