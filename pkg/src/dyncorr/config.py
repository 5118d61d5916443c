"""Global numeric tolerance record and kernel-backend selection.

The active tolerance profile is read from ``DYNCORR_TOLERANCE_PROFILE``
(``default`` or ``strict``) the first time it is needed.  Kernel backend is
chosen by ``DYNCORR_KERNELS`` (``numba`` or ``numpy``); see
:mod:`dyncorr._kernels`.
"""
from __future__ import annotations

import contextlib
import dataclasses
import os
from dataclasses import dataclass

PROFILE_ENV = "DYNCORR_TOLERANCE_PROFILE"


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    trace: float = 1e-9
    psd: float = 1e-10
    eig_offdiag: float = 1e-12
    eig_max_sweeps: int = 100
    unitary: float = 1e-10
    kraus_completeness: float = 1e-9
    purity: float = 1e-9
    i_bar_clamp: float = 1e-9
    uncorrelated: float = 1e-8
    maximal: float = 1e-8
    evolve_rel: float = 1e-10
    evolve_abs: float = 1e-13
    evolve_max_steps: int = 10_000_000
    trace_drift: float = 1e-8
    positivity: float = 1e-8
    bisection: float = 1e-6
    bisection_max_iter: int = 100

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ValueError(f"tolerance {field.name!r} must be positive, got {value!r}")

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


PROFILES = {
    "default": Tolerances(),
    "strict": Tolerances(
        uncorrelated=1e-10,
        maximal=1e-10,
        evolve_rel=1e-12,
        evolve_abs=1e-15,
    ),
}

_active: Tolerances | None = None


def profile_from_env() -> Tolerances:
    name = os.environ.get(PROFILE_ENV, "default").strip().lower() or "default"
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(
            f"{PROFILE_ENV}={name!r} is not one of {sorted(PROFILES)}"
        ) from None


def get_tolerances() -> Tolerances:
    global _active
    if _active is None:
        _active = profile_from_env()
    return _active


def set_tolerances(tol: Tolerances | None) -> None:
    """Install ``tol`` as the process-wide record (``None`` re-reads the env)."""
    global _active
    _active = tol


@contextlib.contextmanager
def tolerances(tol: Tolerances):
    previous = _active
    set_tolerances(tol)
    try:
        yield tol
    finally:
        set_tolerances(previous)


def parse_overrides(items) -> dict:
    """Parse ``KEY=VALUE`` strings into typed overrides for :class:`Tolerances`."""
    types = {f.name: f.type for f in dataclasses.fields(Tolerances)}
    out = {}
    for item in items:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in types:
            raise ValueError(f"bad tolerance override {item!r}")
        out[key] = int(raw) if types[key] in (int, "int") else float(raw)
    return out
