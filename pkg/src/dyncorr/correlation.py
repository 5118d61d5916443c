"""Normalised mutual information of Choi states as a measure of correlated dynamics.

For a channel on ``S = AB`` with ``dim A = dim B = d`` the measure is

    i_bar = [S(rho_AA') + S(rho_BB') - S(rho)] / (4 ln d)

evaluated on the Choi state ``rho`` (subsystems ordered A, B, A', B').
It vanishes exactly for product channels, is at most one, and cannot grow
under pre/post composition with product channels.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channels import (
    Channel,
    choi_state,
    compose,
    max_entangled_vector,
    random_channel,
    random_unitary,
    tensor_channels,
    unitarity_defect,
)
from .config import get_tolerances
from .errors import AsymmetricDimensions, BadDimension, InvariantViolation, NotPositive, NotUnitary
from .linalg import DensityMatrix, as_matrix, eigvalsh, partial_trace


def entropy_from_eigenvalues(lam, psd_tol: float) -> float:
    lam = np.asarray(lam, dtype=float)
    if lam.size and lam.min() < -psd_tol:
        raise NotPositive(f"eigenvalue {lam.min():.3e} below -{psd_tol:g}")
    lam = lam[lam > 0.0]
    return float(-np.sum(lam * np.log(lam)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in nats, with 0 ln 0 = 0 and roundoff-negative eigenvalues dropped."""
    tol = get_tolerances()
    return entropy_from_eigenvalues(eigvalsh(rho.matrix, tol), tol.psd)


@dataclass(frozen=True)
class CorrelationReport:
    i_bar: float
    mutual_information: float
    entropy_AA: float
    entropy_BB: float
    entropy_total: float
    d: int

    def as_dict(self) -> dict:
        return asdict(self)


def _party_dim(choi: DensityMatrix) -> int:
    if len(choi.dims) != 4:
        raise BadDimension(f"Choi state must have 4 subsystems (A, B, A', B'), got {choi.dims}")
    d_A, d_B, d_A2, d_B2 = choi.dims
    if (d_A, d_B) != (d_A2, d_B2):
        raise BadDimension(f"inconsistent Choi dims {choi.dims}")
    if d_A != d_B:
        raise AsymmetricDimensions(f"d_A = {d_A} differs from d_B = {d_B}")
    if d_A < 2:
        raise BadDimension("party dimension must be at least 2")
    return d_A


def mutual_information(choi: DensityMatrix) -> tuple:
    """(I, S_AA', S_BB', S_total) across the AA'|BB' cut, in nats."""
    s_aa = von_neumann_entropy(partial_trace(choi, (0, 2)))
    s_bb = von_neumann_entropy(partial_trace(choi, (1, 3)))
    s_tot = von_neumann_entropy(choi)
    return s_aa + s_bb - s_tot, s_aa, s_bb, s_tot


def i_bar(choi: DensityMatrix) -> CorrelationReport:
    """Correlation report for a Choi state with equal party dimensions.

    Values within the clamp tolerance outside [0, 1] are clamped; anything
    further out raises :class:`InvariantViolation`.
    """
    d = _party_dim(choi)
    tol = get_tolerances()
    mi, s_aa, s_bb, s_tot = mutual_information(choi)
    value = mi / (4.0 * math.log(d))
    if value < -tol.i_bar_clamp or value > 1.0 + tol.i_bar_clamp:
        raise InvariantViolation(f"i_bar = {value:.3e} outside [0, 1]")
    value = min(max(value, 0.0), 1.0)
    return CorrelationReport(value, mi, s_aa, s_bb, s_tot, d)


def i_bar_value(ch: Channel, d: int | None = None) -> float:
    """Shortcut: i_bar of a channel on two d-dimensional parties."""
    if d is None:
        d = ch.dims[0] if ch.dims else math.isqrt(ch.dim)
    return i_bar(choi_state(ch, d, d)).i_bar


def is_uncorrelated(choi: DensityMatrix, tol: float | None = None) -> bool:
    """True iff the AA'|BB' mutual information is below ``tol``."""
    tol = get_tolerances().uncorrelated if tol is None else tol
    _party_dim(choi)
    return mutual_information(choi)[0] < tol


def reshuffle(u, d: int) -> np.ndarray:
    """V with <k m|V|l n> = <k l|U|m n>; an involution on d^2 x d^2 matrices."""
    u = as_matrix(u)
    if u.shape != (d * d, d * d):
        raise BadDimension(f"expected a {d * d}x{d * d} matrix, got {u.shape}")
    return np.ascontiguousarray(u.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d))


def reshuffle_unitarity_defect(u, d: int) -> float:
    v = reshuffle(u, d)
    return float(np.max(np.abs(v @ v.conj().T - np.eye(d * d))))


def is_maximally_correlated(u, d: int, tol: float | None = None) -> bool:
    """Decide i_bar(U) == 1 for a unitary U via unitarity of its reshuffle."""
    tols = get_tolerances()
    tol = tols.maximal if tol is None else tol
    u = as_matrix(u)
    if u.shape != (d * d, d * d):
        raise BadDimension(f"expected a {d * d}x{d * d} matrix, got {u.shape}")
    defect = unitarity_defect(u)
    if defect > tols.unitary:
        raise NotUnitary(f"U U^+ deviates from identity by {defect:.3e}")
    return reshuffle_unitarity_defect(u, d) < tol


def error_probability(choi: DensityMatrix) -> float:
    """1 - sqrt(<Phi|rho|Phi>) against the identity-channel Choi state."""
    d_s = math.isqrt(choi.dim)
    if d_s * d_s != choi.dim:
        raise BadDimension(f"Choi state dimension {choi.dim} is not a square")
    phi = max_entangled_vector(d_s)
    fid = float(np.real(np.vdot(phi, choi.matrix @ phi)))
    fid = min(max(fid, 0.0), 1.0)
    return 1.0 - math.sqrt(fid)


def local_channel(d: int, rng: np.random.Generator, kind: str) -> Channel:
    if kind == "unitary":
        return tensor_channels(Channel.unitary(random_unitary(d, rng)),
                               Channel.unitary(random_unitary(d, rng)))
    return tensor_channels(random_channel(d, rng), random_channel(d, rng))


def check_fundamental_law(ch: Channel, trials: int, rng_seed: int, *, local: str = "cpt",
                          d: int | None = None) -> list:
    """Sandwich ``ch`` between random product maps and record i_bar before/after.

    ``local`` selects the product maps: ``"cpt"`` draws two-operator Gaussian
    Kraus channels on each party, ``"unitary"`` draws local unitaries.  Returns
    a list of ``(before, after)`` pairs; the caller judges monotonicity.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if local not in ("cpt", "unitary"):
        raise ValueError(f"local must be 'cpt' or 'unitary', got {local!r}")
    if d is None:
        d = ch.dims[0] if ch.dims else math.isqrt(ch.dim)
    if d * d != ch.dim:
        raise AsymmetricDimensions(f"channel dimension {ch.dim} is not d^2")
    rng = np.random.default_rng(rng_seed)
    before = i_bar(choi_state(ch, d, d)).i_bar
    pairs = []
    for _ in range(trials):
        left = local_channel(d, rng, local)
        right = local_channel(d, rng, local)
        sandwiched = compose(left, compose(ch, right))
        pairs.append((before, i_bar(choi_state(sandwiched, d, d)).i_bar))
    return pairs
