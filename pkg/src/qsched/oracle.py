"""Classical reference solvers: exhaustive ground-state search, simulated annealing,
and exhaustive enumeration of feasible schedules for small masters."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ising import IsingHamiltonian, index_to_bitstring
from .jssp import JsspInstance, QuboProblem, ScheduleAssignment

BRUTE_FORCE_CAP = 28


@dataclass
class OracleResult:
    ground_energy: float
    ground_states: list[str]
    spectrum: list[tuple[float, int]]

    def excited_energy(self, level: int) -> float:
        """Energy of the ``level``-th distinct level (0 = ground)."""
        return self.spectrum[level][0]

    def to_dict(self) -> dict:
        return {
            "ground_energy": self.ground_energy,
            "ground_states": list(self.ground_states),
            "spectrum": [{"energy": e, "degeneracy": d} for e, d in self.spectrum],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OracleResult":
        return cls(
            ground_energy=data["ground_energy"],
            ground_states=list(data["ground_states"]),
            spectrum=[(s["energy"], int(s["degeneracy"])) for s in data["spectrum"]],
        )


def brute_force(h: IsingHamiltonian, k: int = 10, cap: int = BRUTE_FORCE_CAP, chunk: int = 1 << 20) -> OracleResult:
    """Enumerate all 2^N states; keep the ground states and the ``k`` lowest distinct levels."""
    n = h.num_qubits
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the brute-force cap of {cap}")
    size = 1 << n
    levels: dict[float, int] = {}
    ground = math.inf
    ground_idx: list[np.ndarray] = []
    for start in range(0, size, chunk):
        idx = np.arange(start, min(size, start + chunk), dtype=np.int64)
        e = h.energies_of(idx)
        uniq, cnt = np.unique(e, return_counts=True)
        for val, c in zip(uniq[:k].tolist(), cnt[:k].tolist()):
            levels[val] = levels.get(val, 0) + c
        if len(levels) > k:
            levels = dict(sorted(levels.items())[:k])
        emin = float(uniq[0])
        if emin < ground:
            ground, ground_idx = emin, [idx[e == emin]]
        elif emin == ground:
            ground_idx.append(idx[e == emin])
    states = [index_to_bitstring(int(i), n) for i in np.concatenate(ground_idx)]
    return OracleResult(ground_energy=ground, ground_states=sorted(states), spectrum=sorted(levels.items()))


def _qubo_arrays(q: QuboProblem) -> tuple[np.ndarray, np.ndarray]:
    n = q.num_vars
    lin = np.zeros(n)
    W = np.zeros((n, n))
    for i, c in q.linear.items():
        lin[i] += c
    for (i, j), c in q.quadratic.items():
        W[i, j] += c
        W[j, i] += c
    return lin, W


def simulated_annealing(
    q: QuboProblem,
    sweeps: int = 100,
    restarts: int = 32,
    seed: int | None = None,
    t_hot: float | None = None,
    t_cold: float = 0.01,
) -> tuple[str, float]:
    """Single-bit-flip Metropolis over a geometric temperature ladder.

    All restarts advance together as rows of one array. Returns the best
    bitstring (variable 0 first) and its energy.
    """
    if sweeps < 1 or restarts < 1:
        raise ValueError("sweeps and restarts must be >= 1")
    n = q.num_vars
    if n == 0:
        return "", float(q.offset)
    rng = np.random.default_rng(seed)
    lin, W = _qubo_arrays(q)
    if t_hot is None:
        coefs = np.concatenate([np.abs(lin), np.abs(W[np.triu_indices(n, 1)])])
        t_hot = 10 * max(coefs.max(initial=0.0), 1e-9)
    temps = np.geomspace(t_hot, t_cold, sweeps)

    x = rng.integers(0, 2, size=(restarts, n))
    e = q.offset + x @ lin + 0.5 * np.einsum("ri,ij,rj->r", x, W, x)
    best_e = e.copy()
    best_x = x.copy()
    rows = np.arange(restarts)
    for T in temps:
        for i in rng.permutation(n):
            # energy change of flipping bit i in every restart
            field = lin[i] + x @ W[:, i]
            delta = np.where(x[:, i] == 0, field, -field)
            accept = (delta <= 0) | (rng.random(restarts) < np.exp(-np.clip(delta, 0, None) / T))
            x[accept, i] ^= 1
            e = e + np.where(accept, delta, 0.0)
            better = e < best_e
            best_e[better] = e[better]
            best_x[better] = x[better]
    r = int(rows[np.argmin(best_e)])
    bits = "".join(str(int(b)) for b in best_x[r])
    return bits, float(q.energy([int(c) for c in bits]))


def enumerate_feasible_schedules(instance: JsspInstance):
    """Yield every feasible schedule as per-machine job sequences.

    Feasible schedules put each job on exactly one active slot per machine and
    start it strictly later on each successive machine.
    """
    J = instance.num_jobs
    slots = instance.active_slots

    def extend(m: int, prev_start: dict[int, int] | None, acc: list):
        for perm in itertools.permutations(range(1, J + 1)):
            start = {j: t for j, t in zip(perm, slots[m])}
            if prev_start is not None and any(start[j] <= prev_start[j] for j in start):
                continue
            if m == instance.num_machines - 1:
                yield acc + [perm]
            else:
                yield from extend(m + 1, start, acc + [perm])

    yield from extend(0, None, [])


def _sequence_cost(instance: JsspInstance, m: int, perm: tuple[int, ...]) -> int:
    """Switching cost of machine m (0-based) plus delivery cost if it is the last machine."""
    groups = instance.production_groups[m]
    slots = instance.active_slots[m]
    cost = 0
    for (j1, t1), (j2, t2) in zip(zip(perm, slots), zip(perm[1:], slots[1:])):
        if t2 == t1 + 1 and groups[j1 - 1] != groups[j2 - 1]:
            cost += instance.c_p
    if m == instance.num_machines - 1:
        for j, t in zip(perm, slots):
            d = instance.due_times[j - 1]
            cost += instance.c_e * (d - t) if t <= d else instance.c_l * (t - d)
    return cost


def schedule_optimum(instance: JsspInstance) -> tuple[int, list[ScheduleAssignment]]:
    """Exact optimum over all feasible schedules and every schedule attaining it."""
    cache: dict[tuple[int, tuple[int, ...]], int] = {}
    best, optima = math.inf, []
    for seqs in enumerate_feasible_schedules(instance):
        c = 0
        for m, perm in enumerate(seqs):
            key = (m, perm)
            if key not in cache:
                cache[key] = _sequence_cost(instance, m, perm)
            c += cache[key]
        if c < best:
            best, optima = c, [seqs]
        elif c == best:
            optima.append(seqs)
    return int(best), [ScheduleAssignment.from_sequences(instance, s) for s in optima]


def ground_state_probability(samples, oracle: OracleResult, tol: float = 1e-9) -> float:
    return samples.probability_of_energy(oracle.ground_energy, tol)


__all__ = [
    "OracleResult",
    "brute_force",
    "simulated_annealing",
    "enumerate_feasible_schedules",
    "schedule_optimum",
    "ground_state_probability",
]
