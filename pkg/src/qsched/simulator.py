"""Exact statevector simulation, seeded sampling with readout noise, gate accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ising import IsingHamiltonian, diagonal_energies, index_to_bitstring, qubit_cap

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


class Statevector:
    """2^N amplitudes; qubit q is bit q of the basis index."""

    def __init__(self, amplitudes: np.ndarray):
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(round(math.log2(amps.size))) if amps.size else -1
        if n < 0 or (1 << n) != amps.size:
            raise ValueError("amplitude count must be a power of two")
        if n > qubit_cap():
            raise ValueError(f"{n} qubits exceeds the statevector cap of {qubit_cap()}")
        self.num_qubits = n
        self.amplitudes = amps

    @classmethod
    def zero(cls, n: int) -> "Statevector":
        if n > qubit_cap():
            raise ValueError(f"{n} qubits exceeds the statevector cap of {qubit_cap()}")
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities().sum()))

    def _check(self, *qubits: int):
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise IndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"qubits must be distinct, got {qubits}")

    def _view(self, q: int) -> np.ndarray:
        # axis 1 of the view is qubit q
        return self.amplitudes.reshape(-1, 2, 1 << q)

    def apply_1q(self, q: int, u: np.ndarray) -> "Statevector":
        self._check(q)
        v = self._view(q)
        a0, a1 = v[:, 0, :].copy(), v[:, 1, :].copy()
        v[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
        v[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
        return self

    def apply_h(self, q: int) -> "Statevector":
        return self.apply_1q(q, _H)

    def apply_x(self, q: int) -> "Statevector":
        self._check(q)
        v = self._view(q)
        v[:, [0, 1], :] = v[:, [1, 0], :]
        return self

    def apply_rx(self, q: int, theta: float) -> "Statevector":
        return self.apply_1q(q, rx_matrix(theta))

    def apply_ry(self, q: int, theta: float) -> "Statevector":
        return self.apply_1q(q, ry_matrix(theta))

    def apply_rz(self, q: int, theta: float) -> "Statevector":
        self._check(q)
        v = self._view(q)
        v[:, 0, :] *= np.exp(-0.5j * theta)
        v[:, 1, :] *= np.exp(0.5j * theta)
        return self

    def apply_rzz(self, q: int, r: int, theta: float) -> "Statevector":
        self._check(q, r)
        k = np.arange(self.amplitudes.size, dtype=np.int64)
        parity = ((k >> q) ^ (k >> r)) & 1
        self.amplitudes *= np.where(parity, np.exp(0.5j * theta), np.exp(-0.5j * theta))
        return self

    def apply_cnot(self, control: int, target: int) -> "Statevector":
        self._check(control, target)
        n = self.num_qubits
        psi = self.amplitudes.reshape((2,) * n)
        sl = [slice(None)] * n
        sl[n - 1 - control] = 1
        sub = psi[tuple(sl)]
        axis = n - 1 - target
        if target < control:
            axis -= 1
        a0 = np.take(sub, 0, axis=axis).copy()
        idx0 = [slice(None)] * (n - 1)
        idx1 = [slice(None)] * (n - 1)
        idx0[axis], idx1[axis] = 0, 1
        sub[tuple(idx0)] = sub[tuple(idx1)]
        sub[tuple(idx1)] = a0
        return self

    def apply_diagonal_phase(self, phases: np.ndarray) -> "Statevector":
        """Multiply amplitude k by ``exp(-i * phases[k])``."""
        self.amplitudes *= np.exp(-1j * phases)
        return self


def init_zero(n: int) -> Statevector:
    return Statevector.zero(n)


def apply_cost_phase(sv: Statevector, h: IsingHamiltonian, gamma: float, energies: np.ndarray | None = None):
    """``exp(-i gamma H_C)`` as a diagonal multiply; ``energies`` may be precomputed."""
    if h.num_qubits != sv.num_qubits:
        raise ValueError("Hamiltonian and statevector sizes differ")
    if energies is None:
        energies = diagonal_energies(h)
    sv.apply_diagonal_phase(gamma * energies)
    return sv


def apply_cost_gates(sv: Statevector, h: IsingHamiltonian, gamma: float) -> Statevector:
    """Gate-by-gate form of the cost unitary (up to the global phase of the constant)."""
    for q, c in h.h.items():
        sv.apply_rz(q, 2 * gamma * c)
    for (q, r), c in h.J.items():
        sv.apply_rzz(q, r, 2 * gamma * c)
    return sv


@dataclass
class NoiseModel:
    """Asymmetric readout bit flips on physical measurement slots."""

    flip01: np.ndarray
    flip10: np.ndarray
    slot_map: np.ndarray | None = None

    def __post_init__(self):
        self.flip01 = np.asarray(self.flip01, dtype=float)
        self.flip10 = np.asarray(self.flip10, dtype=float)
        if self.flip01.shape != self.flip10.shape:
            raise ValueError("flip01 and flip10 need one entry per slot")
        for p in (self.flip01, self.flip10):
            if ((p < 0) | (p > 1)).any():
                raise ValueError("flip probabilities must lie in [0, 1]")
        if self.slot_map is None:
            self.slot_map = np.arange(self.flip01.size)
        self.slot_map = np.asarray(self.slot_map, dtype=np.int64)
        m = self.slot_map
        if len(set(m.tolist())) != m.size or (m < 0).any() or (m >= self.flip01.size).any():
            raise ValueError("slot_map must map qubits to distinct physical slots")

    @classmethod
    def asymmetric(cls, n_slots: int, eps: float, rng: np.random.Generator, asymmetry: float = 0.5):
        """Per-slot rates around ``eps``: 1->0 flips more likely than 0->1 by ``(1+a)/(1-a)``."""
        jitter = rng.uniform(0.5, 1.5, size=(2, n_slots))
        return cls(
            flip01=np.clip(eps * (1 - asymmetry) * jitter[0], 0, 1),
            flip10=np.clip(eps * (1 + asymmetry) * jitter[1], 0, 1),
        )

    def remapped(self, slot_map: Sequence[int]) -> "NoiseModel":
        return NoiseModel(self.flip01, self.flip10, np.asarray(slot_map))

    def apply(self, bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Flip each recorded bit of ``bits`` (shots x qubits) with its slot's probability."""
        n = bits.shape[1]
        slots = self.slot_map[:n]
        p = np.where(bits == 1, self.flip10[slots][None, :], self.flip01[slots][None, :])
        flips = rng.random(bits.shape) < p
        return bits ^ flips


@dataclass
class SampleSet:
    counts: dict[str, int]
    energies: dict[str, float] = field(default_factory=dict)

    @property
    def total_shots(self) -> int:
        return sum(self.counts.values())

    @property
    def num_qubits(self) -> int:
        return len(next(iter(self.counts))) if self.counts else 0

    def probabilities(self) -> dict[str, float]:
        n = self.total_shots
        return {b: c / n for b, c in self.counts.items()}

    def best(self) -> tuple[str, float]:
        """Lowest-energy bitstring (ties broken by string order)."""
        b = min(self.counts, key=lambda s: (self.energies[s], s))
        return b, self.energies[b]

    def mean_energy(self) -> float:
        n = self.total_shots
        return sum(c * self.energies[b] for b, c in self.counts.items()) / n

    def probability_of_energy(self, e: float, tol: float = 1e-9) -> float:
        n = self.total_shots
        return sum(c for b, c in self.counts.items() if abs(self.energies[b] - e) <= tol) / n

    def to_dict(self) -> dict:
        keys = sorted(self.counts)
        return {
            "shots": self.total_shots,
            "counts": {b: self.counts[b] for b in keys},
            "energies": {b: self.energies[b] for b in keys if b in self.energies},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleSet":
        return cls(counts={b: int(c) for b, c in data["counts"].items()}, energies=dict(data.get("energies", {})))


def sample_indices(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = probs / probs.sum()
    return rng.choice(p.size, size=shots, p=p)


def sample(
    sv: Statevector,
    shots: int,
    seed: int | np.random.Generator | None = None,
    noise: NoiseModel | None = None,
    h: IsingHamiltonian | None = None,
) -> SampleSet:
    """Measure ``shots`` times in the computational basis.

    Energies are attached when ``h`` is given.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    idx = sample_indices(sv.probabilities(), shots, rng)
    if noise is not None:
        n = sv.num_qubits
        bits = ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
        bits = noise.apply(bits, rng)
        idx = (bits << np.arange(n)[None, :]).sum(axis=1)
    return samples_from_indices(idx, sv.num_qubits, h)


def samples_from_indices(idx: np.ndarray, n: int, h: IsingHamiltonian | None = None) -> SampleSet:
    uniq, cnt = np.unique(idx, return_counts=True)
    counts = {index_to_bitstring(int(k), n): int(c) for k, c in zip(uniq, cnt)}
    energies = {}
    if h is not None:
        for k, e in zip(uniq, h.energies_of(uniq)):
            energies[index_to_bitstring(int(k), n)] = float(e)
    return SampleSet(counts, energies)


@dataclass(frozen=True)
class GateCount:
    one_qubit: int
    two_qubit: int


def count_gates(n: int, p: int, h: IsingHamiltonian | None = None, mixer_kind: str = "warm_start",
                num_couplings: int | None = None) -> GateCount:
    """Native gate counts of a p-layer QAOA circuit.

    One R_y per qubit for state preparation, then per layer one R_z per qubit
    for the fields and three single-qubit gates per qubit for the mixer; every
    coupling costs one R_ZZ per layer. The same convention is used for the
    plain X mixer so both algorithms report comparable numbers.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    if mixer_kind not in ("warm_start", "standard"):
        raise ValueError(f"unknown mixer kind {mixer_kind!r}")
    if num_couplings is None:
        num_couplings = h.num_couplings if h is not None else 0
    return GateCount(one_qubit=n * (1 + 4 * p), two_qubit=p * num_couplings)
