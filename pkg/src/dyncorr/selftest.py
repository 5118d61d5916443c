"""Embedded invariant suites behind ``dyncorr selftest``.

Each check is small enough that the whole suite runs in seconds.  The seed
only changes which random channels are drawn; the verdict must not depend on it.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracles
from .channels import (
    Channel,
    choi_state,
    choi_state_product,
    cnot_matrix,
    random_channel,
    random_unitary,
    swap_matrix,
    tensor_channels,
    twisted_swap_matrix,
)
from .correlation import check_fundamental_law, i_bar, i_bar_value, is_maximally_correlated
from .lindblad import EvolutionConfig, TrajectoryStats, evolve_choi_checkpoints
from .linalg import DensityMatrix, hermitian_eig, partial_trace, trace_distance
from .models import TwoAtomParams, ZZThermalParams, two_atom_generator, zz_thermal_generator

log = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _gate_values(rng):
    eye = Channel.identity(4, (2, 2))
    swap = Channel.unitary(swap_matrix(2), (2, 2))
    cnot = Channel.unitary(cnot_matrix(), (2, 2))
    twisted = Channel.unitary(twisted_swap_matrix() @ swap_matrix(2), (2, 2))
    vals = {"identity": i_bar_value(eye), "swap": i_bar_value(swap),
            "cnot": i_bar_value(cnot), "twisted*swap": i_bar_value(twisted)}
    want = {"identity": 0.0, "swap": 1.0, "cnot": 0.5, "twisted*swap": 0.5}
    worst = max(abs(vals[k] - want[k]) for k in want)
    return worst < 1e-9, f"max deviation {worst:.2e}"


def _range(rng):
    lo, hi = math.inf, -math.inf
    for _ in range(10):
        v = i_bar_value(random_channel(4, rng, n_ops=3), 2)
        lo, hi = min(lo, v), max(hi, v)
    return 0.0 <= lo and hi <= 1.0, f"random channels span [{lo:.3f}, {hi:.3f}]"


def _fundamental_law(rng):
    worst_gain, worst_unitary = 0.0, 0.0
    seed = int(rng.integers(2**31))
    for k, ch in enumerate((Channel.unitary(cnot_matrix(), (2, 2)),
                            Channel.unitary(swap_matrix(2), (2, 2)),
                            Channel.kraus(random_channel(4, rng).operators, (2, 2)))):
        for before, after in check_fundamental_law(ch, 5, seed + k, local="cpt"):
            worst_gain = max(worst_gain, after - before)
        for before, after in check_fundamental_law(ch, 3, seed + 10 + k, local="unitary"):
            worst_unitary = max(worst_unitary, abs(after - before))
    ok = worst_gain <= 1e-8 and worst_unitary < 1e-9
    return ok, f"max gain {worst_gain:.2e}, local-unitary change {worst_unitary:.2e}"


def _factorization(rng):
    worst_td, worst_i = 0.0, 0.0
    for _ in range(5):
        a, b = random_channel(2, rng), random_channel(2, rng)
        joint = choi_state(tensor_channels(a, b), 2, 2)
        prod = choi_state_product(choi_state(a, 2, 1).with_dims((2, 2)),
                                  choi_state(b, 2, 1).with_dims((2, 2)))
        worst_td = max(worst_td, trace_distance(joint, prod))
        worst_i = max(worst_i, i_bar(joint).i_bar)
    return worst_td < 1e-10 and worst_i < 1e-8, f"trace distance {worst_td:.2e}, i_bar {worst_i:.2e}"


def _maximality_pool(rng):
    swap = swap_matrix(2)
    pool = []
    for _ in range(6):
        left = np.kron(random_unitary(2, rng), random_unitary(2, rng))
        right = np.kron(random_unitary(2, rng), random_unitary(2, rng))
        pool.append(left @ swap @ right)
    pool += [twisted_swap_matrix(), cnot_matrix(), np.eye(4, dtype=complex)]
    pool += [random_unitary(4, rng) for _ in range(6)]
    disagree = 0
    for u in pool:
        maximal = is_maximally_correlated(u, 2)
        near_one = abs(i_bar_value(Channel.unitary(u, (2, 2))) - 1.0) < 1e-6
        disagree += maximal != near_one
    return disagree == 0, f"{len(pool)} unitaries, {disagree} disagreements"


def _eig_oracle(rng):
    worst = 0.0
    for _ in range(3):
        z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = z + z.conj().T
        worst = max(worst, float(np.max(np.abs(
            hermitian_eig(h).eigenvalues - oracles.hermitian_eigenvalues_by_bracketing(h)))))
    return worst < 1e-8, f"max eigenvalue deviation {worst:.2e}"


def _partial_trace_oracle(rng):
    dims = (2, 3, 2)
    z = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    m = z @ z.conj().T
    rho = DensityMatrix(m / np.trace(m).real, dims)
    worst = 0.0
    for keep in ((0,), (1,), (0, 2), (1, 2)):
        ref = oracles.partial_trace_bruteforce(rho.matrix, dims, keep)
        worst = max(worst, float(np.max(np.abs(partial_trace(rho, keep).matrix - ref))))
    return worst < 1e-12, f"max entry deviation {worst:.2e}"


def _integrator_oracle(rng):
    r = float(rng.uniform(0.05, 2.0))
    T = float(rng.uniform(0.1, 3.0))
    cases = [two_atom_generator(TwoAtomParams(r=r)), zz_thermal_generator(ZZThermalParams(T=T))]
    times = [0.05, 0.5]
    worst = 0.0
    stats = TrajectoryStats()
    for gen in cases:
        states = evolve_choi_checkpoints(gen, times, EvolutionConfig(), (2, 2), stats)
        for t, s in zip(times, states):
            ref = oracles.choi_by_superoperator(gen.hamiltonian, gen.jump_ops, gen.rates, t)
            worst = max(worst, trace_distance(s, DensityMatrix(ref, s.dims, validate=False)))
    valid = (stats.max_trace_drift < 1e-8 and stats.max_hermiticity_defect < 1e-10
             and stats.min_eigenvalue > -1e-8)
    return worst < 1e-6 and valid, (f"trace distance {worst:.2e}; drift {stats.max_trace_drift:.1e}, "
                                    f"min eigenvalue {stats.min_eigenvalue:.1e}")


CHECKS: list[tuple[str, Callable]] = [
    ("gate-values", _gate_values),
    ("range", _range),
    ("fundamental-law", _fundamental_law),
    ("product-factorization", _factorization),
    ("maximality-criterion", _maximality_pool),
    ("eigensolver-oracle", _eig_oracle),
    ("partial-trace-oracle", _partial_trace_oracle),
    ("integrator-oracle", _integrator_oracle),
]


def run_selftest(seed: int = 0, checks=None) -> list[CheckResult]:
    """Run each check with its own generator derived from ``seed``."""
    results = []
    for k, (name, fn) in enumerate(checks or CHECKS):
        rng = np.random.default_rng([seed, k])
        start = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed invariant, not a crash of the tool
            log.debug("check %s raised", name, exc_info=True)
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return results
