import math

import numpy as np
import pytest

from dyncorr import _kernels, oracles
from dyncorr.channels import max_entangled_state
from dyncorr.correlation import i_bar
from dyncorr.errors import DimensionMismatch, InvariantViolation, StepLimitExceeded, TraceDrift
from dyncorr.lindblad import (
    EvolutionConfig,
    LindbladGenerator,
    TrajectoryStats,
    evolve,
    evolve_checkpoints,
    evolve_choi,
    evolve_choi_checkpoints,
    lindblad_rhs,
)
from dyncorr.linalg import DensityMatrix, trace_distance
from dyncorr.models import (
    EXCITED,
    GROUND,
    SIGMA_MINUS,
    SIGMA_Z,
    TwoAtomParams,
    ZZThermalParams,
    on_qubit,
    two_atom_generator,
    zz_thermal_generator,
)

from helpers import random_density, random_hermitian


def _decay(gamma):
    return LindbladGenerator(np.zeros((2, 2)), (SIGMA_MINUS,), [[gamma]])


def _single_dissipator(op, gamma, rho):
    opd = op.conj().T
    return gamma * (op @ rho @ opd - 0.5 * (opd @ op @ rho + rho @ opd @ op))


# generator ------------------------------------------------------------------

def test_zero_generator_gives_zero(rng):
    gen = LindbladGenerator(np.zeros((3, 3)), (np.eye(3),), [[0.0]])
    np.testing.assert_array_equal(lindblad_rhs(gen, random_density(rng, 3)), 0)


def test_amplitude_damping_rhs():
    gamma = 0.7
    rho = np.outer(EXCITED, EXCITED)
    want = gamma * (np.outer(GROUND, GROUND) - rho)
    np.testing.assert_allclose(lindblad_rhs(_decay(gamma), rho), want, atol=1e-15)


def test_independent_rates_separate(rng):
    g0 = 1.3
    jumps = (on_qubit(SIGMA_MINUS, 0), on_qubit(SIGMA_MINUS, 1))
    gen = LindbladGenerator(np.zeros((4, 4)), jumps, g0 * np.eye(2))
    rho = random_density(rng, 4)
    want = sum(_single_dissipator(op, g0, rho) for op in jumps)
    np.testing.assert_allclose(lindblad_rhs(gen, rho), want, atol=1e-14)


def test_effective_form_matches_double_sum(rng):
    n, m = 3, 3
    ops = tuple(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(m))
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    gen = LindbladGenerator(random_hermitian(rng, n), ops, z @ z.conj().T)
    heff, ms = gen.effective_operators
    rho = random_density(rng, n)
    eff = -1j * (heff @ rho - rho @ heff.conj().T) + sum(k @ rho @ k.conj().T for k in ms)
    np.testing.assert_allclose(eff, lindblad_rhs(gen, rho), atol=1e-12)


def test_generator_validation():
    with pytest.raises(InvariantViolation):
        LindbladGenerator(np.array([[0, 1], [0, 0]]), (), [])
    with pytest.raises(InvariantViolation):
        LindbladGenerator(np.zeros((2, 2)), (SIGMA_MINUS,), [[-1.0]])
    with pytest.raises(InvariantViolation):
        LindbladGenerator(np.zeros((2, 2)), (SIGMA_MINUS, SIGMA_Z), [[1, 1j], [0, 1]])
    with pytest.raises(DimensionMismatch):
        LindbladGenerator(np.zeros((2, 2)), (np.eye(3),), [[1.0]])


def test_rank_deficient_rates_accepted():
    gen = two_atom_generator(TwoAtomParams(r=0.0))
    assert len(gen.effective_operators[1]) == 1


# evolution ---------------------------------------------------------------------

def test_zero_time_returns_input():
    rho = DensityMatrix.pure(EXCITED)
    assert evolve(_decay(1.0), rho, EvolutionConfig(t_final=0.0)) is rho
    choi = evolve_choi(_decay(1.0), EvolutionConfig(t_final=0.0))
    np.testing.assert_array_equal(choi.matrix, max_entangled_state(2).matrix)


@pytest.mark.parametrize("gamma_t", [0.1, 1.0, 3.0])
def test_amplitude_damping_analytic(gamma_t):
    gamma = 2.5
    out = evolve(_decay(gamma), DensityMatrix.pure(EXCITED), EvolutionConfig(t_final=gamma_t / gamma))
    assert abs(out.matrix[0, 0].real - math.exp(-gamma_t)) < 1e-7


def test_coherence_decays_at_half_rate():
    gamma, t = 1.0, 1.2
    plus = DensityMatrix.pure(np.array([1, 1]) / math.sqrt(2))
    out = evolve(_decay(gamma), plus, EvolutionConfig(t_final=t))
    assert abs(abs(out.matrix[0, 1]) - 0.5 * math.exp(-gamma * t / 2)) < 1e-8


def test_unitary_precession():
    w, t = 1.0, 0.9
    gen = LindbladGenerator(0.5 * w * SIGMA_Z, (), [])
    plus = DensityMatrix.pure(np.array([1, 1]) / math.sqrt(2))
    out = evolve(gen, plus, EvolutionConfig(t_final=t))
    assert out.matrix[0, 1] == pytest.approx(0.5 * np.exp(-1j * w * t), abs=1e-9)


def test_semigroup_property(rng):
    gen = zz_thermal_generator(ZZThermalParams(T=0.8))
    rho0 = DensityMatrix(random_density(rng, 4))
    direct = evolve(gen, rho0, EvolutionConfig(t_final=1.0))
    half = evolve(gen, rho0, EvolutionConfig(t_final=0.4))
    split = evolve(gen, half, EvolutionConfig(t_final=0.6))
    assert trace_distance(direct, split) < 1e-8


def test_checkpoints_match_separate_runs(rng):
    gen = two_atom_generator(TwoAtomParams(r=0.5))
    rho0 = DensityMatrix(random_density(rng, 4))
    times = [0.01, 0.1, 0.3]
    states = evolve_checkpoints(gen, rho0, times)
    for t, s in zip(times, states):
        assert trace_distance(s, evolve(gen, rho0, EvolutionConfig(t_final=t))) < 1e-8


@pytest.mark.parametrize("gen", [
    two_atom_generator(TwoAtomParams(r=0.3)),
    zz_thermal_generator(ZZThermalParams(T=1.5)),
], ids=["two-atom", "zz-thermal"])
def test_choi_trajectory_matches_superoperator_oracle(gen):
    times = [0.05, 0.4, 2.0]
    states = evolve_choi_checkpoints(gen, times)
    for t, s in zip(times, states):
        ref = oracles.choi_by_superoperator(gen.hamiltonian, gen.jump_ops, gen.rates, t)
        assert trace_distance(s, DensityMatrix(ref, s.dims, validate=False)) < 1e-6


def test_local_hamiltonian_stays_uncorrelated():
    h = 0.5 * (on_qubit(SIGMA_Z, 0) + on_qubit(SIGMA_Z, 1))
    gen = LindbladGenerator(h, (), [])
    for s in evolve_choi_checkpoints(gen, [0.3, 1.0, 4.0]):
        assert i_bar(s).i_bar < 1e-8


def test_stats_and_validity():
    stats = TrajectoryStats()
    evolve_choi_checkpoints(two_atom_generator(TwoAtomParams(r=0.1)), np.geomspace(1e-4, 10, 30), stats=stats)
    assert stats.checkpoints == 30 and stats.steps > 0
    assert stats.max_trace_drift < 1e-8
    assert stats.max_hermiticity_defect < 1e-10
    assert stats.min_eigenvalue > -1e-8


def test_checkpoint_argument_checks():
    gen = _decay(1.0)
    rho = DensityMatrix.pure(EXCITED)
    assert evolve_checkpoints(gen, rho, []) == []
    with pytest.raises(ValueError):
        evolve_checkpoints(gen, rho, [1.0, 0.5])
    with pytest.raises(DimensionMismatch):
        evolve_checkpoints(gen, DensityMatrix(np.eye(3) / 3), [1.0])
    with pytest.raises(ValueError):
        EvolutionConfig(t_final=-1.0)


def test_step_limit_reported_with_time():
    cfg = EvolutionConfig(t_final=5.0, max_steps=3)
    with pytest.raises(StepLimitExceeded) as info:
        evolve(_decay(1.0), DensityMatrix.pure(EXCITED), cfg)
    assert info.value.time is not None and info.value.time < 5.0


def test_trace_drift_detected(monkeypatch):
    def leaky(rho0, heff, ms, times, *args):
        states = np.array([rho0 * 1.01 for _ in times])
        return states, 1, 0.1, _kernels.OK, times[-1]

    monkeypatch.setattr(_kernels, "integrate", leaky)
    with pytest.raises(TraceDrift):
        evolve(_decay(1.0), DensityMatrix.pure(EXCITED), EvolutionConfig(t_final=1.0))
