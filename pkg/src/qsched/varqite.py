"""Variational imaginary-time evolution with a per-Pauli-term linear system.

For every Z-string P_i of the cost Hamiltonian the parameters are moved so
that d<P_i>/dtau = -<{P_i, H - E}>, which gives ``A theta_dot = B`` with one
row per term and one column per parameter. Columns of A come from two
parameter-shifted evaluations each; B comes from one evaluation at theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ising import IsingHamiltonian, basis_spins, diagonal_energies
from .simulator import SampleSet, Statevector, sample


@dataclass(frozen=True)
class Ansatz:
    """H on every qubit, then per layer: CNOTs on (0,1),(2,3),..., CNOTs on (1,2),(3,4),..., R_y on every qubit.

    Parameters are indexed layer-major: ``theta[layer * N + qubit]``.
    """

    num_qubits: int
    layers: int

    @property
    def num_params(self) -> int:
        return self.layers * self.num_qubits

    def cnot_pairs(self) -> list[tuple[int, int]]:
        n = self.num_qubits
        return [(q, q + 1) for q in range(0, n - 1, 2)] + [(q, q + 1) for q in range(1, n - 1, 2)]

    def state(self, theta: Sequence[float]) -> Statevector:
        theta = np.asarray(theta, dtype=float)
        if theta.size != self.num_params:
            raise ValueError(f"expected {self.num_params} parameters, got {theta.size}")
        n = self.num_qubits
        sv = Statevector.zero(n)
        for q in range(n):
            sv.apply_h(q)
        for layer in range(self.layers):
            for c, t in self.cnot_pairs():
                sv.apply_cnot(c, t)
            for q in range(n):
                sv.apply_ry(q, theta[layer * n + q])
        return sv

    def gate_count(self) -> tuple[int, int]:
        """(single-qubit, two-qubit) gates of the constructed circuit."""
        n = self.num_qubits
        return n + self.num_params, self.layers * len(self.cnot_pairs())


def build_ansatz(n: int, layers: int = 2) -> Ansatz:
    if n < 2:
        raise ValueError("the brickwork ansatz needs at least 2 qubits")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    return Ansatz(n, layers)


def z_string_values(n: int, qubits: Sequence[int]) -> np.ndarray:
    """Eigenvalue of the Z-string on ``qubits`` for every basis state."""
    out = np.ones(1 << n, dtype=np.int64)
    for q in qubits:
        out = out * basis_spins(n, q)
    return out


def expectation(sv: Statevector, qubits: Sequence[int]) -> float:
    """<Z_{q1} Z_{q2} ...> of a statevector."""
    return float(sv.probabilities() @ z_string_values(sv.num_qubits, qubits))


@dataclass
class LinearSystem:
    A: np.ndarray
    B: np.ndarray
    energy: float
    evaluations: int


class _TermTable:
    """Cached Z-string eigenvalue vectors and diagonal energies of one Hamiltonian."""

    def __init__(self, h: IsingHamiltonian):
        self.h = h
        self.terms = h.pauli_terms()
        n = h.num_qubits
        self.values = np.array([z_string_values(n, qs) for qs, _ in self.terms], dtype=float).reshape(
            len(self.terms), 1 << n
        )
        self.energies = diagonal_energies(h)


def _probabilities(ansatz: Ansatz, theta: np.ndarray, shots: int, rng: np.random.Generator | None) -> np.ndarray:
    probs = ansatz.state(theta).probabilities()
    if shots <= 0:
        return probs
    return rng.multinomial(shots, probs / probs.sum()) / shots


def build_system(
    ansatz: Ansatz,
    theta: Sequence[float],
    h: IsingHamiltonian,
    table: _TermTable | None = None,
    shots: int = 0,
    rng: np.random.Generator | None = None,
) -> LinearSystem:
    """A_ij = Re<psi|P_i d_j psi>, B_i = -<P_i (H - E)>, E = <H>.

    d<P_i>/d theta_j = (<P_i>(theta_j + pi/2) - <P_i>(theta_j - pi/2)) / 2 for
    R_y parameters, and d<P_i> = 2 Re<psi|P_i d psi>, hence the factor 1/4.
    With ``shots > 0`` every expectation is estimated from that many samples.
    """
    if h.num_qubits != ansatz.num_qubits:
        raise ValueError("Hamiltonian and ansatz sizes differ")
    if shots > 0 and rng is None:
        rng = np.random.default_rng()
    table = table or _TermTable(h)
    theta = np.asarray(theta, dtype=float)
    probs = _probabilities(ansatz, theta, shots, rng)
    E = float(probs @ table.energies)
    # P_i commutes with H, so the anticommutator is 2 P_i (H - E)
    B = -(table.values @ (probs * (table.energies - E)))

    A = np.zeros((len(table.terms), ansatz.num_params))
    for j in range(ansatz.num_params):
        plus, minus = theta.copy(), theta.copy()
        plus[j] += math.pi / 2
        minus[j] -= math.pi / 2
        diff = _probabilities(ansatz, plus, shots, rng) - _probabilities(ansatz, minus, shots, rng)
        A[:, j] = table.values @ diff / 4
    return LinearSystem(A=A, B=B, energy=E, evaluations=2 * ansatz.num_params + 1)


def solve_step(
    sys: LinearSystem, dtau: float, theta: Sequence[float], reg: float = 1e-8, damping: float = 0.0
) -> tuple[np.ndarray, bool]:
    """Euler step ``theta + dtau * theta_dot``.

    theta_dot solves ``A theta_dot = B`` in the least-squares sense: singular
    values below ``reg * s_max`` are dropped, and with ``damping > 0`` the
    rest are Tikhonov-filtered as ``s / (s^2 + damping * s_max^2)``.
    Returns the new parameters and whether the step stalled (A identically zero).
    """
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    theta = np.asarray(theta, dtype=float)
    return theta + dtau * parameter_velocity(sys, reg, damping), not np.any(sys.A)


def parameter_velocity(sys: LinearSystem, reg: float = 1e-8, damping: float = 0.0) -> np.ndarray:
    if sys.A.size == 0 or not np.any(sys.A):
        return np.zeros(sys.A.shape[1])
    U, S, Vt = np.linalg.svd(sys.A, full_matrices=False)
    keep = S > reg * S[0]
    inv = np.zeros_like(S)
    inv[keep] = S[keep] / (S[keep] ** 2 + damping * S[0] ** 2)
    return Vt.T @ (inv * (U.T @ sys.B))


def dtau_schedule(d0: float, r: float, step: int) -> float:
    if not 0 <= r < 1:
        raise ValueError("r must lie in [0, 1)")
    return d0 * (1 - r) ** step


@dataclass
class VarQiteStep:
    step: int
    tau: float
    dtau: float
    energy: float
    theta_norm: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class VarQiteResult:
    trajectory: list[VarQiteStep]
    theta: np.ndarray
    final_energy: float
    samples: SampleSet | None
    evaluations: int
    trial_evaluations: int = 0
    halvings: int = 0
    stalled_steps: int = 0

    @property
    def energies(self) -> list[float]:
        """<H> before every step, then after the last one."""
        return [s.energy for s in self.trajectory] + [self.final_energy]


DEFAULT_DAMPINGS = (0.0, 1e-3, 1e-2, 1e-1)


def run_varqite(
    h: IsingHamiltonian,
    ansatz: Ansatz | None = None,
    n_steps: int = 65,
    d0: float = 0.1,
    r: float = 0.06,
    reg: float = 1e-8,
    shots_final: int = 0,
    seed: int | None = None,
    dampings: Sequence[float] = DEFAULT_DAMPINGS,
    safeguard: bool = True,
    shots_per_eval: int = 0,
    max_halvings: int = 20,
) -> VarQiteResult:
    """Evolve from theta = 0 for ``n_steps`` Euler steps and optionally sample the final state.

    Without ``safeguard`` every step is the plain Euler update with
    ``dampings[0]``. With it, each step tries one candidate per damping
    value and keeps the lowest-energy one that does not raise <H>; when none
    descends the step size is halved, up to ``max_halvings`` times, after
    which the step is skipped. Candidate energies are counted in
    ``trial_evaluations``; ``evaluations`` counts the linear-system circuits
    only, ``n_steps * (2 N_p + 1)``.

    ``trajectory[k].energy`` is <H> before step k; ``final_energy`` is <H>
    after the last step.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not dampings or any(d < 0 for d in dampings):
        raise ValueError("dampings must be a nonempty list of nonnegative values")
    ansatz = ansatz or build_ansatz(h.num_qubits, 2)
    if h.num_qubits != ansatz.num_qubits:
        raise ValueError("Hamiltonian and ansatz sizes differ")
    rng = np.random.default_rng(seed)
    table = _TermTable(h)

    def energy_at(th: np.ndarray) -> float:
        return float(_probabilities(ansatz, th, shots_per_eval, rng) @ table.energies)

    theta = np.zeros(ansatz.num_params)
    tau, evals, trials, halvings, stalled = 0.0, 0, 0, 0, 0
    traj: list[VarQiteStep] = []
    system = build_system(ansatz, theta, h, table, shots_per_eval, rng)
    for k in range(n_steps):
        evals += system.evaluations
        stalled += not np.any(system.A)
        dtau = dtau_schedule(d0, r, k)
        if not safeguard:
            candidate = theta + dtau * parameter_velocity(system, reg, dampings[0])
        else:
            velocities = [parameter_velocity(system, reg, d) for d in dampings]
            candidate = None
            for attempt in range(max_halvings + 1):
                cands = [theta + dtau * v for v in velocities]
                energies = [energy_at(c) for c in cands]
                trials += len(cands)
                best = int(np.argmin(energies))
                if energies[best] <= system.energy:
                    candidate = cands[best]
                    break
                if attempt < max_halvings:
                    dtau /= 2
                    halvings += 1
            if candidate is None:
                candidate, dtau = theta, 0.0
        traj.append(VarQiteStep(k, tau, dtau, system.energy, float(np.linalg.norm(theta))))
        theta = candidate
        tau += dtau
        if k + 1 < n_steps:
            system = build_system(ansatz, theta, h, table, shots_per_eval, rng)
    final_sv = ansatz.state(theta)
    final_energy = float(final_sv.probabilities() @ table.energies)
    samples = sample(final_sv, shots_final, rng, h=h) if shots_final > 0 else None
    return VarQiteResult(
        trajectory=traj,
        theta=theta,
        final_energy=final_energy,
        samples=samples,
        evaluations=evals,
        trial_evaluations=trials,
        halvings=halvings,
        stalled_steps=stalled,
    )
