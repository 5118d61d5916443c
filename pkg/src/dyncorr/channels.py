"""Quantum channels, their action, and Choi-Jamiolkowski states.

A :class:`Channel` is either a single unitary or a list of Kraus operators on
a ``d_S``-dimensional space.  Channels never carry basis metadata: the
computational basis is the Schmidt basis of the maximally entangled reference
state, and channel equality is only ever decided through Choi states.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import get_tolerances
from .errors import BadDimension, DimensionMismatch, InvariantViolation, NotUnitary
from .linalg import DensityMatrix, as_matrix, inverse_sqrt_psd, kron, permute_subsystems, tensor

UNITARY = "unitary"
KRAUS = "kraus"


@dataclass(frozen=True, eq=False)
class Channel:
    """CPT map given by a unitary or by Kraus operators.

    ``dims`` optionally records the bipartition ``(d_A, d_B)``; it is only
    used as a default by :func:`choi_state`.
    """

    kind: str
    operators: tuple
    dims: tuple | None = None

    def __post_init__(self):
        if self.kind not in (UNITARY, KRAUS):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        ops = tuple(as_matrix(k) for k in self.operators)
        if not ops:
            raise DimensionMismatch("a channel needs at least one operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise DimensionMismatch(f"operator shape {k.shape} != ({d}, {d})")
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        if self.dims is not None:
            dims = tuple(int(x) for x in self.dims)
            if int(np.prod(dims)) != d:
                raise DimensionMismatch(f"dims {dims} do not match operator size {d}")
            object.__setattr__(self, "dims", dims)
        tol = get_tolerances()
        if self.kind == UNITARY:
            if len(ops) != 1:
                raise ValueError("a unitary channel holds exactly one matrix")
            defect = unitarity_defect(ops[0])
            if defect > tol.unitary:
                raise NotUnitary(f"U U^+ deviates from identity by {defect:.3e}")
        else:
            defect = completeness_defect(ops)
            if defect > tol.kraus_completeness:
                raise InvariantViolation(f"sum K^+K deviates from identity by {defect:.3e}")

    @classmethod
    def unitary(cls, u, dims=None) -> "Channel":
        return cls(UNITARY, (u,), dims)

    @classmethod
    def kraus(cls, ops: Sequence, dims=None) -> "Channel":
        return cls(KRAUS, tuple(ops), dims)

    @classmethod
    def identity(cls, d: int, dims=None) -> "Channel":
        return cls.unitary(np.eye(d), dims)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def is_unitary(self) -> bool:
        return self.kind == UNITARY

    @property
    def matrix(self) -> np.ndarray:
        if not self.is_unitary:
            raise TypeError("Kraus channel has no single matrix")
        return self.operators[0]

    @property
    def kraus_ops(self) -> tuple:
        return self.operators

    def adjoint_unitary(self) -> "Channel":
        return Channel.unitary(self.matrix.conj().T, self.dims)


def unitarity_defect(u) -> float:
    u = as_matrix(u)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


def completeness_defect(ops) -> float:
    ops = [as_matrix(k) for k in ops]
    s = sum(k.conj().T @ k for k in ops)
    return float(np.max(np.abs(s - np.eye(s.shape[0]))))


# ---------------------------------------------------------------------------
# states and action
# ---------------------------------------------------------------------------

def max_entangled_state(d: int, subsystem_dims: Sequence[int] | None = None) -> DensityMatrix:
    """|Phi><Phi| with |Phi> = d^{-1/2} sum_j |j>|j> on a d-dimensional system S
    and an identical copy S'.

    For ``S = AB`` pass ``subsystem_dims=(d_A, d_B)``; the result is then tagged
    ``[d_A, d_B, d_A, d_B]`` (order A, B, A', B') and each of the ``d`` terms
    carries amplitude ``1/sqrt(d_A d_B)``.
    """
    d = int(d)
    if d < 2:
        raise BadDimension(f"dimension must be >= 2, got {d}")
    sub = tuple(subsystem_dims) if subsystem_dims is not None else (d,)
    if int(np.prod(sub)) != d:
        raise BadDimension(f"subsystem dims {sub} do not multiply to {d}")
    psi = np.eye(d, dtype=np.complex128).ravel() / np.sqrt(d)
    return DensityMatrix(np.outer(psi, psi.conj()), sub + sub, validate=False)


def max_entangled_vector(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128).ravel() / np.sqrt(d)


def _check_output(m: np.ndarray, dims) -> DensityMatrix:
    try:
        return DensityMatrix(m, dims)
    except InvariantViolation as exc:
        raise InvariantViolation(f"channel output is not a valid state: {exc}") from None


def apply(ch: Channel, rho: DensityMatrix) -> DensityMatrix:
    """Action of ``ch`` on ``rho``; the output is re-validated as a state."""
    if ch.dim != rho.dim:
        raise DimensionMismatch(f"channel acts on {ch.dim} dims, state has {rho.dim}")
    r = rho.matrix
    out = sum(k @ r @ k.conj().T for k in ch.operators)
    return _check_output(out, rho.dims)


def apply_to_S(ch: Channel, rho: DensityMatrix, s_subsystems: Sequence[int] = (0, 1)) -> DensityMatrix:
    """Apply ``ch`` on the subsystems ``s_subsystems`` and the identity elsewhere."""
    dims = rho.dims
    s = [int(i) for i in s_subsystems]
    if len(set(s)) != len(s) or any(i < 0 or i >= len(dims) for i in s):
        raise DimensionMismatch(f"bad subsystem selection {s} for dims {dims}")
    d_s = int(np.prod([dims[i] for i in s]))
    if d_s != ch.dim:
        raise DimensionMismatch(f"channel acts on {ch.dim} dims, selected subsystems span {d_s}")
    rest = [i for i in range(len(dims)) if i not in s]
    perm = s + rest
    moved = permute_subsystems(rho, perm) if perm != list(range(len(dims))) else rho
    d_rest = rho.dim // d_s
    eye = np.eye(d_rest)
    r = moved.matrix
    out = np.zeros_like(r)
    for k in ch.operators:
        big = np.kron(k, eye)
        out += big @ r @ big.conj().T
    result = _check_output(out, moved.dims)
    if perm == list(range(len(dims))):
        return result
    inverse = list(np.argsort(perm))
    return permute_subsystems(result, inverse)


def choi_state(ch: Channel, d_A: int | None = None, d_B: int | None = None) -> DensityMatrix:
    """Choi-Jamiolkowski state (E_S x 1)(|Phi><Phi|) tagged [d_A, d_B, d_A, d_B].

    Uses ``(K x 1)|Phi> = vec(K)/sqrt(d_S)`` for row-major ``vec``.
    """
    if d_A is None or d_B is None:
        if ch.dims is None:
            raise DimensionMismatch("d_A, d_B required for a channel without dims")
        d_A, d_B = ch.dims
    d = int(d_A) * int(d_B)
    if d != ch.dim:
        raise DimensionMismatch(f"d_A*d_B = {d} but channel acts on {ch.dim} dims")
    vecs = np.stack([k.ravel() for k in ch.operators]) / np.sqrt(d)
    m = vecs.T @ vecs.conj()
    dims = (d_A, d_B, d_A, d_B)
    return DensityMatrix(m, dims, validate=False)


def choi_state_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Reorder (A A') x (B B') into the A, B, A', B' layout of a bipartite Choi state."""
    if len(a.dims) != 2 or len(b.dims) != 2:
        raise DimensionMismatch("single-party Choi states must have two subsystems")
    # A, A', B, B' -> A, B, A', B'
    return permute_subsystems(tensor(a, b), (0, 2, 1, 3))


def tensor_channels(a: Channel, b: Channel) -> Channel:
    """E_A x E_B; unitary when both factors are unitary, Kraus otherwise."""
    dims = (a.dim, b.dim)
    if a.is_unitary and b.is_unitary:
        return Channel.unitary(kron(a.matrix, b.matrix), dims)
    ops = [kron(x, y) for x in a.operators for y in b.operators]
    return Channel.kraus(ops, dims)


def compose(outer: Channel, inner: Channel) -> Channel:
    """outer o inner."""
    if outer.dim != inner.dim:
        raise DimensionMismatch(f"cannot compose {outer.dim}- and {inner.dim}-dim channels")
    dims = outer.dims or inner.dims
    if outer.is_unitary and inner.is_unitary:
        return Channel.unitary(outer.matrix @ inner.matrix, dims)
    ops = [o @ i for o in outer.operators for i in inner.operators]
    return Channel.kraus(ops, dims)


# ---------------------------------------------------------------------------
# named gates and random channels
# ---------------------------------------------------------------------------

def swap_matrix(d: int) -> np.ndarray:
    u = np.zeros((d * d, d * d), dtype=np.complex128)
    for k in range(d):
        for l in range(d):
            u[l * d + k, k * d + l] = 1.0
    return u


def cnot_matrix() -> np.ndarray:
    return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


def twisted_swap_matrix() -> np.ndarray:
    """Two-qubit unitary |10><01| + i(|00><10| + |01><00| + |11><11|).

    Maximally correlated, yet not locally equivalent to the swap.
    """
    u = np.zeros((4, 4), dtype=np.complex128)
    u[2, 1] = 1.0
    u[0, 2] = 1j
    u[1, 0] = 1j
    u[3, 3] = 1j
    return u


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Gram-Schmidt orthonormalisation of a standard-normal complex matrix."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q = np.zeros_like(z)
    for j in range(d):
        v = z[:, j].copy()
        for i in range(j):
            v -= np.vdot(q[:, i], v) * q[:, i]
        for i in range(j):  # second pass keeps orthogonality at 1e-15
            v -= np.vdot(q[:, i], v) * q[:, i]
        q[:, j] = v / np.linalg.norm(v)
    return q


def random_kraus(d: int, rng: np.random.Generator, n_ops: int = 2) -> list:
    """``n_ops`` Gaussian Kraus operators right-normalised by (sum K^+K)^{-1/2}."""
    ops = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(n_ops)]
    s = sum(k.conj().T @ k for k in ops)
    norm = inverse_sqrt_psd(s)
    return [k @ norm for k in ops]


def random_channel(d: int, rng: np.random.Generator, n_ops: int = 2) -> Channel:
    return Channel.kraus(random_kraus(d, rng, n_ops))


# ---------------------------------------------------------------------------
# JSON channel files
# ---------------------------------------------------------------------------

class ChannelFormatError(ValueError):
    pass


def _decode_matrix(obj) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ChannelFormatError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ChannelFormatError(f"expected an n x n array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_matrix(m) -> list:
    m = as_matrix(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def channel_from_dict(obj: dict) -> Channel:
    """Build a channel from the JSON schema ``{kind, dims, matrix|operators}``.

    Raises :class:`ChannelFormatError` for schema problems and lets the
    channel's own CPT validation errors propagate.
    """
    if not isinstance(obj, dict):
        raise ChannelFormatError("channel file must hold a JSON object")
    kind = obj.get("kind")
    dims = obj.get("dims")
    if (not isinstance(dims, list) or len(dims) != 2
            or not all(isinstance(x, int) and x >= 1 for x in dims)):
        raise ChannelFormatError("'dims' must be [d_A, d_B] with positive integers")
    if kind == UNITARY:
        if "matrix" not in obj:
            raise ChannelFormatError("unitary channel needs 'matrix'")
        mats = [_decode_matrix(obj["matrix"])]
    elif kind == KRAUS:
        ops = obj.get("operators")
        if not isinstance(ops, list) or not ops:
            raise ChannelFormatError("kraus channel needs a non-empty 'operators' list")
        mats = [_decode_matrix(k) for k in ops]
    else:
        raise ChannelFormatError(f"'kind' must be 'unitary' or 'kraus', got {kind!r}")
    d = dims[0] * dims[1]
    for m in mats:
        if m.shape[0] != d:
            raise DimensionMismatch(f"matrix is {m.shape[0]}x{m.shape[0]} but dims {dims} imply {d}")
    return Channel(kind, tuple(mats), tuple(dims))


def channel_to_dict(ch: Channel, dims=None) -> dict:
    dims = list(dims or ch.dims or ())
    if len(dims) != 2:
        raise DimensionMismatch("dims (d_A, d_B) are required for serialisation")
    out = {"kind": ch.kind, "dims": dims}
    if ch.is_unitary:
        out["matrix"] = _encode_matrix(ch.matrix)
    else:
        out["operators"] = [_encode_matrix(k) for k in ch.operators]
    return out


def load_channel(path: str | os.PathLike) -> Channel:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ChannelFormatError(f"invalid JSON: {exc}") from None
    return channel_from_dict(obj)


def save_channel(ch: Channel, path: str | os.PathLike, dims=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_dict(ch, dims), fh, indent=1)
        fh.write("\n")
