"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records its outcome with ``record`` so the run ends with one
PASS/FAIL line per criterion.
"""

import itertools
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import random_ising, record
from qsched.dnl import DnlConfig, aggregate, generate_variants, mass_where, plain_mean
from qsched.ising import diagonal_energies, qubo_to_ising
from qsched.jssp import (
    ScheduleAssignment,
    build_full_instance,
    build_qubo,
    constraint_penalties,
    derive_sub_instance,
    edd_base,
    schedule_cost,
    synthetic_base,
    synthetic_master,
    synthetic_sub_instance,
    total_cost,
)
from qsched.oracle import brute_force, schedule_optimum
from qsched.qaoa import (
    InitAngles,
    IterativeConfig,
    apply_mixer,
    iterative_qaoa,
    linear_ramp,
    prepare_initial_state,
    qaoa_state,
    run_qaoa,
)
from qsched.simulator import NoiseModel, Statevector, apply_cost_gates, count_gates
from qsched.varqite import Ansatz, build_ansatz, build_system, expectation, run_varqite, solve_step

SEEDS = range(5)


def legal_specs(max_vars):
    inst = synthetic_master()
    for spec in itertools.product(range(inst.num_jobs + 1), repeat=inst.num_machines):
        if list(spec) == sorted(spec, reverse=True) and sum(k * k for k in spec) <= max_vars:
            yield spec


def independent_feasible(inst, x) -> bool:
    """Direct check of the three scheduling rules, written without the penalty code."""
    start = {}
    for m in range(inst.num_machines):
        T = inst.time_slots[m]
        idle = inst.idle_slots[m]
        for t in range(1, T + 1):
            jobs = [j for j in range(inst.num_jobs) if x[m, j, t - 1]]
            if len(jobs) != (0 if t in idle else 1):
                return False
        for j in range(inst.num_jobs):
            slots = [t for t in range(1, T + 1) if x[m, j, t - 1]]
            if len(slots) != 1:
                return False
            start[m, j] = slots[0]
    return all(start[m, j] < start[m + 1, j] for m in range(inst.num_machines - 1) for j in range(inst.num_jobs))


# -- 1 and 2: exhaustive equivalence and feasibility --------------------------

@pytest.fixture(scope="module")
def enumerated():
    """Per legal spec: (sub, qubo, ising, list of (bits, qubo E, ising E, cost, penalties, x))."""
    inst, base = synthetic_master(), synthetic_base()
    out = []
    for spec in legal_specs(14):
        sub = derive_sub_instance(inst, base, spec)
        q = build_qubo(sub)
        h = qubo_to_ising(q)
        bits = np.array(list(itertools.product((0, 1), repeat=sub.n_var)), dtype=np.int64).reshape(2**sub.n_var, sub.n_var)
        idx = (bits << np.arange(sub.n_var)).sum(axis=1)
        q_e = q.energies(bits)
        i_e = h.energies_of(idx)
        rows = []
        for b, qe, ie in zip(bits, q_e, i_e):
            a = sub.merge(b)
            rows.append((b, qe, ie, total_cost(inst, a), sum(constraint_penalties(inst, a)), a.x))
        out.append((spec, sub, h, rows))
    return out


def test_criterion_1_triple_equivalence(enumerated):
    total = mismatches = 0
    for _, _, _, rows in enumerated:
        for _, qe, ie, cost, _, _ in rows:
            total += 1
            exact = float(qe).is_integer() and float(ie).is_integer()
            if not (exact and int(qe) == int(ie) == cost):
                mismatches += 1
    ok = record(1, mismatches == 0,
                f"{len(enumerated)} specs, {total} bitstrings, {mismatches} mismatches between qubo/ising/total_cost")
    assert ok


def test_criterion_2_feasibility_soundness(enumerated):
    inst = synthetic_master()
    bad = 0
    bad_ground = 0
    for _, sub, h, rows in enumerated:
        feasible_exists = False
        for _, _, _, _, pen, x in rows:
            feas = independent_feasible(inst, x)
            feasible_exists |= feas
            bad += (pen == 0) != feas
        oracle = brute_force(h, k=1)
        for s in oracle.ground_states:
            a = sub.merge([int(c) for c in s])
            if feasible_exists and not independent_feasible(inst, a.x):
                bad_ground += 1
    ok = record(2, bad == 0 and bad_ground == 0,
                f"penalty==0 <=> feasible violated {bad} times; infeasible oracle ground states {bad_ground}")
    assert ok


# -- 3: sub-instance arithmetic ---------------------------------------------

def test_criterion_3_sub_instance_arithmetic():
    inst = build_full_instance()
    base = edd_base(inst)
    sizes = {s: derive_sub_instance(inst, base, s).n_var for s in [(4, 2, 2), (5, 2, 2), (4, 4, 2), (5, 4, 3), (6, 6, 5)]}
    sub = derive_sub_instance(inst, base, (5, 2, 2))
    zero = next(v for v in sub.free_vars if base[v] == 0)
    refrozen = derive_sub_instance(inst, base, (5, 2, 2), [zero]).n_var
    ok = list(sizes.values()) == [24, 33, 36, 50, 97] and refrozen == 32
    record(3, ok, f"n_var {list(sizes.values())}, refreeze one -> {refrozen}")
    assert ok


# -- 4: gate counts ------------------------------------------------------------

class CountingStatevector(Statevector):
    def __init__(self, amplitudes):
        super().__init__(amplitudes)
        self.one = self.two = 0

    def apply_1q(self, q, u):
        self.one += 1
        return super().apply_1q(q, u)

    def apply_rz(self, q, theta):
        self.one += 1
        return super().apply_rz(q, theta)

    def apply_rzz(self, q, r, theta):
        self.two += 1
        return super().apply_rzz(q, r, theta)


def gate_level_circuit(h, p, phis):
    sv = prepare_initial_state(h.num_qubits, InitAngles(phis))
    sv = CountingStatevector(sv.amplitudes)
    sv.one = h.num_qubits  # the R_y state preparation above
    sched = linear_ramp(p, 0.3)
    for beta, gamma in zip(sched.betas, sched.gammas):
        apply_cost_gates(sv, h, gamma)
        apply_mixer(sv, beta, InitAngles(phis))
    return sv


def test_criterion_4_gate_counts():
    table = {(24, 4): 408, (32, 5): 672, (33, 5): 693, (36, 6): 900, (50, 6): 1250, (97, 6): 2425, (97, 7): 2813}
    table_ok = all(count_gates(n, p).one_qubit == v for (n, p), v in table.items())
    closed_ok = True
    rng = np.random.default_rng(0)
    for n in (6, 9, 12):
        h = qubo_to_ising(build_qubo(synthetic_sub_instance(n)))
        phis = rng.uniform(0.2, 2.9, n)
        for p in (1, 3):
            sv = gate_level_circuit(h, p, phis)
            gc = count_gates(n, p, h)
            ref = qaoa_state(h, linear_ramp(p, 0.3), InitAngles(phis), "warm_start")
            overlap = abs(np.vdot(ref.amplitudes, sv.amplitudes))
            closed_ok &= (sv.one, sv.two) == (gc.one_qubit, gc.two_qubit) == (n * (1 + 4 * p), p * h.num_couplings)
            closed_ok &= abs(overlap - 1) < 1e-9
    ok = record(4, table_ok and closed_ok,
                f"Table-4 1Q counts {'match' if table_ok else 'differ'}; "
                f"gate-level circuits on synthetic 6/9/12 {'match' if closed_ok else 'differ'} N(1+4p) and p*|couplings|")
    assert ok


# -- 5: LR-QAOA valley ---------------------------------------------------------

def test_criterion_5_lr_qaoa_valley():
    h = qubo_to_ising(build_qubo(synthetic_sub_instance(12)))
    energies = diagonal_energies(h)
    deltas = np.round(np.arange(1, 31) * 0.05, 10)
    ps = range(2, 31)
    mean = np.zeros((len(deltas), len(ps)))
    k = 0
    for i, d in enumerate(deltas):
        for j, p in enumerate(ps):
            mean[i, j] = run_qaoa(h, linear_ramp(p, d), None, "standard", 4000, [0, k], None, energies).mean_energy()
            k += 1
    normalised = mean / mean.max()
    argmins = {p: float(deltas[np.argmin(mean[:, j])]) for j, p in enumerate(ps) if p >= 15}
    ok = all(0.10 - 1e-9 <= a <= 0.30 + 1e-9 for a in argmins.values()) and (normalised > 0).all()
    record(5, ok, f"argmin delta for p>=15 spans {min(argmins.values()):.2f}..{max(argmins.values()):.2f}")
    assert ok


# -- 6 and 7: iterative QAOA -----------------------------------------------------

@pytest.fixture(scope="module")
def problem16():
    h = qubo_to_ising(build_qubo(synthetic_sub_instance(16)))
    energies = diagonal_energies(h)
    return h, energies, brute_force(h, k=10)


def test_criterion_6_iterative_dominance(problem16):
    h, energies, oracle = problem16
    g = oracle.ground_energy
    finals, monotone = [], True
    for s in SEEDS:
        recs = iterative_qaoa(h, IterativeConfig(p=4, delta=0.17, n_iter=10, seed=s), ground_energy=g, energies=energies)
        finals.append(recs[-1].ground_state_probability)
        best = [r.best_energy for r in recs]
        monotone &= all(b <= a for a, b in zip(best, best[1:]))
    lr = [run_qaoa(h, linear_ramp(4, 0.17), shots=4000, seed=s, energies=energies).probability_of_energy(g) for s in SEEDS]
    med, lr_med = float(np.median(finals)), float(np.median(lr))
    ok = med >= 0.5 and med >= 10 * lr_med and monotone
    record(6, ok, f"median final GS prob {med:.4f} vs LR-QAOA p=4 {lr_med:.4f}; running best monotone {monotone}; "
                  "24-qubit stretch not run (needs a user-supplied base schedule)")
    assert ok


def test_criterion_7_robust_to_poor_schedule(problem16):
    h, energies, oracle = problem16
    g = oracle.ground_energy
    hits = 0
    for s in SEEDS:
        cfg = IterativeConfig(p=4, delta=1.25, n_iter=10, seed=s, beta_T_kind="constant", beta_T_min=0.5, beta_T_max=0.5)
        recs = iterative_qaoa(h, cfg, ground_energy=g, energies=energies)
        hits += any(r.ground_state_probability > 0 for r in recs)
    ok = hits >= 3
    record(7, ok, f"ground state sampled within 10 iterations in {hits}/5 seeds at delta=1.25")
    assert ok


# -- 8: VarQITE ----------------------------------------------------------------

# Pre-registered instance set: seeds 0-19, N drawn from 2..6, coefficients in [-4, 4].
VARQITE_SEEDS = range(20)


def varqite_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    return random_ising(n, rng, scale=4.0)


@pytest.fixture(scope="module")
def varqite_runs():
    out = {}
    for s in VARQITE_SEEDS:
        h = varqite_instance(s)
        out[s] = (h, run_varqite(h, n_steps=65, d0=0.1, r=0.06), brute_force(h, k=1).ground_energy)
    return out


def test_criterion_8_varqite_mechanics(varqite_runs):
    worst_fd = 0.0
    for n in (2, 3, 4):
        rng = np.random.default_rng(100 + n)
        h = random_ising(n, rng)
        a = build_ansatz(n, 2)
        theta = rng.uniform(-math.pi, math.pi, a.num_params)
        A = build_system(a, theta, h).A
        terms = h.pauli_terms()
        for j in range(a.num_params):
            d = np.zeros_like(theta)
            d[j] = 1e-5
            plus = np.array([expectation(a.state(theta + d), qs) for qs, _ in terms])
            minus = np.array([expectation(a.state(theta - d), qs) for qs, _ in terms])
            worst_fd = max(worst_fd, float(np.abs(A[:, j] - (plus - minus) / 4e-5).max()))

    from qsched.ising import IsingHamiltonian
    toy = build_system(Ansatz(1, 1), [0.0], IsingHamiltonian(1, 0.0, {0: 1.0}))
    step, _ = solve_step(toy, 1.0, [0.0])
    toy_ok = np.allclose(toy.A, [[-0.5]]) and np.allclose(toy.B, [-1.0]) and np.allclose(step, [2.0])

    rises = [float(np.max(np.diff(r.energies))) for _, r, _ in varqite_runs.values()]
    monotone = all(x <= 1e-6 for x in rises)

    a64 = build_ansatz(16, 4)
    h16 = random_ising(16, np.random.default_rng(0), density=0.2)
    acc = build_system(a64, np.zeros(a64.num_params), h16).evaluations
    per_step = [r.evaluations == 65 * (2 * len(r.theta) + 1) for _, r, _ in varqite_runs.values()]

    ok = worst_fd <= 1e-6 and toy_ok and monotone and acc == 129 and all(per_step)
    record(8, ok, f"A vs finite differences max err {worst_fd:.1e}; toy (A,B,theta_dot)=(-1/2,-1,2) {toy_ok}; "
                  f"monotone on {sum(x <= 1e-6 for x in rises)}/{len(rises)}; evaluations at N_p=64: {acc}")
    assert ok


@pytest.mark.xfail(strict=True, reason="variational traps: see the VarQITE accuracy entry in the decisions ledger")
def test_criterion_8_varqite_accuracy(varqite_runs):
    misses = [
        (s, h.num_qubits, round(g, 3), round(r.final_energy, 3))
        for s, (h, r, g) in varqite_runs.items()
        if abs(r.final_energy - g) > 0.05 * abs(g)
    ]
    ok = not misses
    record(8, ok, f"final <H> within 5% of ground on {len(varqite_runs) - len(misses)}/{len(varqite_runs)}"
                  + (f"; misses (seed, N, ground, final) {misses}" if misses else ""))
    assert ok


# -- 9: DNL efficacy -------------------------------------------------------------

def test_criterion_9_dnl_efficacy(problem16):
    h, energies, oracle = problem16
    g = oracle.ground_energy
    last = iterative_qaoa(h, IterativeConfig(seed=0), ground_energy=g, energies=energies)[-1]
    sv = qaoa_state(h, linear_ramp(4, 0.17), InitAngles(last.init_angles), "warm_start", energies)
    ideal = float(sv.probabilities()[energies == g].sum())
    e5 = oracle.excited_energy(5)
    def high(b):
        return h.energy(b) > e5

    raw_gs, mit_gs, raw_hi, mit_hi, limit_err = [], [], [], [], 0.0
    for s in range(20):
        rng = np.random.default_rng(s)
        noise = NoiseModel.asymmetric(h.num_qubits, 0.02, rng)
        vs = generate_variants(sv, 25, 4000 // 25, rng, noise, h)
        raw = plain_mean(vs)
        mit = aggregate(vs, DnlConfig(alpha=4, v_th=2, v_max=25))
        raw_gs.append(sum(raw.get(b, 0) for b in oracle.ground_states))
        mit_gs.append(sum(mit.get(b, 0) for b in oracle.ground_states))
        raw_hi.append(mass_where(raw, high))
        mit_hi.append(mass_where(mit, high))
        lim = aggregate(vs, DnlConfig(alpha=0, v_th=0, v_max=25))
        limit_err = max(limit_err, max(abs(lim.get(b, 0) - raw.get(b, 0)) for b in set(lim) | set(raw)))
    med = {k: float(np.median(v)) for k, v in
           dict(raw_gs=raw_gs, mit_gs=mit_gs, raw_hi=raw_hi, mit_hi=mit_hi).items()}
    shrink = 1 - med["mit_hi"] / med["raw_hi"]
    ok = ideal >= 0.7 and med["mit_gs"] > med["raw_gs"] and shrink >= 0.2 and limit_err <= 1e-9
    record(9, ok, f"ideal GS {ideal:.3f}; median GS raw {med['raw_gs']:.4f} -> mitigated {med['mit_gs']:.4f}; "
                  f"mass above 5th excited level shrinks {shrink:.0%}; alpha=0 limit err {limit_err:.1e}")
    assert ok


# -- 10: warm-start eigenstate ---------------------------------------------------

def test_criterion_10_warm_start_eigenstate():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(100):
        phis = rng.uniform(0, math.pi, 8)
        beta = float(rng.uniform(-math.pi, math.pi))
        psi = prepare_initial_state(8, InitAngles(phis))
        out = apply_mixer(psi.copy(), beta, InitAngles(phis))
        worst = max(worst, abs(abs(np.vdot(psi.amplitudes, out.amplitudes)) - 1))
    ok = worst <= 1e-10
    record(10, ok, f"max | |<psi|U_M|psi>| - 1 | over 100 draws = {worst:.1e}")
    assert ok


# -- 11: determinism -------------------------------------------------------------

def test_criterion_11_repro_determinism(tmp_path):
    dirs = [tmp_path / "a", tmp_path / "b"]
    env = dict(os.environ)
    for d in dirs:
        subprocess.run([sys.executable, "-m", "qsched", "--seed", "0", "--no-timestamp", "--out", str(d), "repro"],
                       check=True, env=env, capture_output=True)
    files = sorted(p.relative_to(dirs[0]) for p in dirs[0].rglob("*") if p.is_file())
    other = sorted(p.relative_to(dirs[1]) for p in dirs[1].rglob("*") if p.is_file())
    differ = [str(f) for f in files if (dirs[0] / f).read_bytes() != (dirs[1] / f).read_bytes()]
    ok = files == other and not differ and len(files) > 0
    record(11, ok, f"{len(files)} files from two full repro runs, {len(differ)} differ")
    assert ok


# -- paper full-instance arithmetic (needs the published optimum) ------------------

@pytest.mark.skipif("QSCHED_BASE_SOLUTION" not in os.environ,
                    reason="needs the full-instance optimum as a base schedule file (QSCHED_BASE_SOLUTION)")
def test_full_instance_base_cost():
    from qsched.jssp import load_json
    inst = build_full_instance()
    data = load_json(Path(os.environ["QSCHED_BASE_SOLUTION"]))
    base = (ScheduleAssignment.from_sequences(inst, data["sequences"]) if "sequences" in data
            else ScheduleAssignment.from_ones(inst, data["ones"]))
    assert schedule_cost(inst, base) == 193


def test_synthetic_master_optimum_matches_base():
    best, optima = schedule_optimum(synthetic_master())
    assert best == schedule_cost(synthetic_master(), synthetic_base()) and len(optima) == 1
