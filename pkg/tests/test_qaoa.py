import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsched.ising import IsingHamiltonian, diagonal_energies
from qsched.oracle import brute_force
from qsched.qaoa import (
    InitAngles,
    IterativeConfig,
    Schedule,
    apply_mixer,
    beta_T_schedule,
    bias_to_angles,
    boltzmann_bias,
    iterative_qaoa,
    linear_ramp,
    prepare_initial_state,
    qaoa_state,
    run_qaoa,
)
from qsched.simulator import SampleSet

from conftest import random_ising


# -- schedules ---------------------------------------------------------------

def test_linear_ramp_examples():
    s = linear_ramp(2, 0.17)
    assert s.betas == pytest.approx((0.17, 0.085)) and s.gammas == pytest.approx((0.085, 0.17))
    one = linear_ramp(1, 0.3, 0.5)
    assert one.betas == (0.3,) and one.gammas == (0.5,)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.floats(0.01, 2.0), st.floats(0.01, 2.0))
def test_linear_ramp_endpoints_and_monotonicity(p, db, dg):
    s = linear_ramp(p, db, dg)
    assert s.p == p
    assert s.betas[0] == pytest.approx(db) and s.betas[-1] == pytest.approx(db / p)
    assert s.gammas[0] == pytest.approx(dg / p) and s.gammas[-1] == pytest.approx(dg)
    assert all(a > b for a, b in zip(s.betas, s.betas[1:]))
    assert all(a < b for a, b in zip(s.gammas, s.gammas[1:]))


def test_linear_ramp_depth_zero_is_empty_and_negative_rejected():
    assert linear_ramp(0, 0.2).p == 0
    with pytest.raises(ValueError):
        linear_ramp(-1, 0.2)


def test_beta_T_schedules():
    q = beta_T_schedule("quadratic", 0.1, 1.0, 10)
    assert q[0] == pytest.approx(0.1) and q[-1] == pytest.approx(1.0)
    assert all(a <= b for a, b in zip(q, q[1:]))
    assert beta_T_schedule("constant", 0.5, 1.0, 4) == [0.5] * 4
    assert beta_T_schedule("quadratic", 0.1, 1.0, 1) == [1.0]
    with pytest.raises(ValueError):
        beta_T_schedule("quadratic", 0.1, 1.0, 0)
    with pytest.raises(ValueError):
        beta_T_schedule("cubic", 0.1, 1.0, 3)


# -- bias --------------------------------------------------------------------

TWO = SampleSet({"00": 5, "11": 1}, {"00": 0.0, "11": 1.0})


def test_boltzmann_bias_examples():
    assert boltzmann_bias(TWO, 0.0) == pytest.approx([0.0, 0.0])
    assert boltzmann_bias(TWO, math.inf) == pytest.approx([1.0, 1.0])
    expected = (1 - math.exp(-1)) / (1 + math.exp(-1))
    assert boltzmann_bias(TWO, 1.0) == pytest.approx([expected, expected], abs=1e-12)
    assert expected == pytest.approx(0.4621, abs=1e-4)


def test_boltzmann_bias_large_beta_is_stable():
    s = SampleSet({"0": 1, "1": 1}, {"0": 1e6, "1": 1e6 + 1})
    assert boltzmann_bias(s, 1e3) == pytest.approx([1.0])


def test_boltzmann_ties_share_weight():
    s = SampleSet({"01": 1, "10": 1, "11": 1}, {"01": 0.0, "10": 0.0, "11": 5.0})
    assert boltzmann_bias(s, math.inf) == pytest.approx([0.0, 0.0])


def test_shot_weighted_mode():
    assert boltzmann_bias(TWO, 0.0, shot_weighted=True) == pytest.approx([4 / 6, 4 / 6])


def test_bias_errors():
    with pytest.raises(ValueError):
        boltzmann_bias(SampleSet({}, {}), 1.0)
    with pytest.raises(ValueError):
        boltzmann_bias(TWO, -1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 50))
def test_bias_bounded(seed, beta):
    rng = np.random.default_rng(seed)
    keys = {"".join(map(str, rng.integers(0, 2, 4))) for _ in range(6)}
    s = SampleSet({k: 1 for k in keys}, {k: float(rng.normal()) for k in keys})
    b = boltzmann_bias(s, beta)
    assert np.all(np.abs(b) <= 1 + 1e-12)


def test_bias_to_angles_examples():
    assert bias_to_angles([1.0, 0.0, -1.0]).phis == pytest.approx((0.0, math.pi / 2, math.pi))
    assert bias_to_angles([1.0], eta=-1).phis == pytest.approx((math.pi,))
    with pytest.raises(ValueError):
        bias_to_angles([0.0], eta=0)
    with pytest.raises(ValueError):
        InitAngles((4.0,))


# -- circuits ----------------------------------------------------------------

def test_depth_zero_is_uniform():
    h = random_ising(3, np.random.default_rng(0))
    probs = qaoa_state(h, linear_ramp(0, 0.2)).probabilities()
    assert probs == pytest.approx(np.full(8, 1 / 8))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_warm_start_without_cost_keeps_initial_distribution(seed):
    rng = np.random.default_rng(seed)
    n = 4
    init = InitAngles(tuple(rng.uniform(0, math.pi, n)))
    betas = tuple(rng.uniform(-2, 2, 3))
    sv = qaoa_state(IsingHamiltonian(n), Schedule(betas, (0.0,) * 3), init, "warm_start")
    assert np.allclose(sv.probabilities(), prepare_initial_state(n, init).probabilities(), atol=1e-12)


@pytest.mark.parametrize("J,beta,gamma", [(1.0, 0.3, 0.5), (0.7, 0.9, 0.2), (-1.3, 0.4, 1.1)])
def test_two_qubit_closed_form(J, beta, gamma):
    h = IsingHamiltonian(2, 0.0, {}, {(0, 1): J})
    p = qaoa_state(h, Schedule((beta,), (gamma,))).probabilities()
    zz = -math.sin(4 * beta) * math.sin(2 * gamma * J)
    assert p == pytest.approx([(1 + zz) / 4, (1 - zz) / 4, (1 - zz) / 4, (1 + zz) / 4], abs=1e-12)


def test_standard_mixer_equals_warm_start_at_half_pi():
    rng = np.random.default_rng(4)
    h = random_ising(3, rng)
    sched = linear_ramp(3, 0.4)
    half = InitAngles((math.pi / 2,) * 3)
    a = qaoa_state(h, sched)
    b = qaoa_state(h, sched, half, "warm_start")
    assert abs(np.vdot(a.amplitudes, b.amplitudes)) == pytest.approx(1.0, abs=1e-12)


def test_mixer_errors():
    h = IsingHamiltonian(2)
    with pytest.raises(ValueError):
        qaoa_state(h, linear_ramp(1, 0.1), None, "warm_start")
    with pytest.raises(ValueError):
        qaoa_state(h, linear_ramp(1, 0.1), None, "xy")


def test_mixer_unitarity():
    sv = prepare_initial_state(3, InitAngles((0.3, 1.2, 2.0)))
    apply_mixer(sv, 0.77, InitAngles((0.1, 0.2, 0.3)))
    assert sv.norm() == pytest.approx(1.0, abs=1e-12)


# -- iterative driver --------------------------------------------------------

def test_single_iteration_equals_lr_qaoa(sub12):
    from qsched.ising import qubo_to_ising
    from qsched.jssp import build_qubo

    h = qubo_to_ising(build_qubo(sub12))
    recs = iterative_qaoa(h, IterativeConfig(n_iter=1, shots=300, seed=5))
    direct = run_qaoa(h, linear_ramp(4, 0.17), shots=300, seed=np.random.default_rng(5))
    assert recs[0].samples.counts == direct.counts


def test_single_bitstring_feedback_pins_angles():
    h = IsingHamiltonian(3, 0.0, {0: 5.0, 1: -5.0, 2: 5.0})
    recs = iterative_qaoa(h, IterativeConfig(p=1, delta=1e-9, n_iter=2, shots=50, seed=0, beta_T_kind="constant",
                                             beta_T_min=math.inf))
    assert set(recs[1].init_angles) <= {0.0, math.pi}


def test_iterative_records_and_determinism(sub12):
    from qsched.ising import qubo_to_ising
    from qsched.jssp import build_qubo

    h = qubo_to_ising(build_qubo(sub12))
    g = brute_force(h, 1).ground_energy
    cfg = IterativeConfig(n_iter=5, shots=500, seed=3)
    a = iterative_qaoa(h, cfg, ground_energy=g, energies=diagonal_energies(h))
    b = iterative_qaoa(h, cfg, ground_energy=g)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    assert a[0].init_angles is None and all(r.init_angles is not None for r in a[1:])
    best = [r.best_energy for r in a]
    assert all(x >= y for x, y in zip(best, best[1:]))
    assert all(0 <= r.ground_state_probability <= 1 for r in a)
