"""Spin form of QUBO problems and bitstring energy evaluation.

Conventions shared by every module:

* bit 0 <-> z = +1 and bit 1 <-> z = -1, so ``x = (1 - z) / 2``;
* qubit q is bit q of a computational-basis index (qubit 0 least significant);
* text bitstrings list qubit 0 first.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .jssp import QuboProblem

DEFAULT_QUBIT_CAP = 26


def qubit_cap() -> int:
    return int(os.environ.get("QSCHED_QUBIT_CAP", DEFAULT_QUBIT_CAP))


def index_to_bits(k: int, n: int) -> list[int]:
    return [(k >> q) & 1 for q in range(n)]


def bits_to_index(bits: Sequence[int]) -> int:
    return sum(int(b) << q for q, b in enumerate(bits))


def index_to_bitstring(k: int, n: int) -> str:
    return "".join(str((k >> q) & 1) for q in range(n))


def bitstring_to_index(s: str) -> int:
    return int(s[::-1], 2) if s else 0


def basis_spins(n: int, q: int, indices: np.ndarray | None = None) -> np.ndarray:
    """z eigenvalue of qubit q for each basis index (all 2^n if ``indices`` is None)."""
    k = np.arange(1 << n, dtype=np.int64) if indices is None else indices
    return 1 - 2 * ((k >> q) & 1)


@dataclass
class IsingHamiltonian:
    num_qubits: int
    constant: float = 0.0
    h: dict[int, float] = field(default_factory=dict)
    J: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        couplings = {}
        for (q, r), c in self.J.items():
            if q == r:
                raise ValueError(f"coupling ({q},{r}) repeats a qubit")
            key = (min(q, r), max(q, r))
            couplings[key] = couplings.get(key, 0.0) + c
        self.J = couplings
        for q in list(self.h) + [i for pair in self.J for i in pair]:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range")

    @property
    def num_couplings(self) -> int:
        return len(self.J)

    def pauli_terms(self) -> list[tuple[tuple[int, ...], float]]:
        """Non-constant Z-string terms: single-qubit fields first, then couplings."""
        terms = [((q,), c) for q, c in sorted(self.h.items())]
        terms += [((q, r), c) for (q, r), c in sorted(self.J.items())]
        return terms

    def energy(self, s: str | Sequence[int]) -> float:
        bits = [int(c) for c in s]
        if len(bits) != self.num_qubits:
            raise ValueError(f"expected {self.num_qubits} bits, got {len(bits)}")
        z = [1 - 2 * b for b in bits]
        e = self.constant
        for q, c in self.h.items():
            e += c * z[q]
        for (q, r), c in self.J.items():
            e += c * z[q] * z[r]
        return e

    def energies_of(self, indices: np.ndarray) -> np.ndarray:
        """Energies of the given basis indices."""
        idx = np.asarray(indices, dtype=np.int64)
        e = np.full(idx.shape, float(self.constant))
        spins = {}

        def z(q):
            if q not in spins:
                spins[q] = basis_spins(self.num_qubits, q, idx)
            return spins[q]

        for q, c in self.h.items():
            e += c * z(q)
        for (q, r), c in self.J.items():
            e += c * (z(q) * z(r))
        return e

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "constant": self.constant,
            "h": {str(q): c for q, c in sorted(self.h.items())},
            "J": {f"{q},{r}": c for (q, r), c in sorted(self.J.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IsingHamiltonian":
        J = {}
        for key, c in data.get("J", {}).items():
            q, r = (int(a) for a in key.split(","))
            J[(q, r)] = c
        return cls(
            num_qubits=int(data["num_qubits"]),
            constant=data.get("constant", 0.0),
            h={int(q): c for q, c in data.get("h", {}).items()},
            J=J,
        )


def qubo_to_ising(q: QuboProblem) -> IsingHamiltonian:
    """Substitute ``x_i = (1 - z_i) / 2`` and collect terms.

    Integer QUBO coefficients give multiples of 1/4, which floats hold exactly.
    """
    constant = float(q.offset)
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    for i, a in q.linear.items():
        constant += a / 2
        h[i] = h.get(i, 0.0) - a / 2
    for (i, k), b in q.quadratic.items():
        constant += b / 4
        h[i] = h.get(i, 0.0) - b / 4
        h[k] = h.get(k, 0.0) - b / 4
        J[(i, k)] = J.get((i, k), 0.0) + b / 4
    return IsingHamiltonian(
        num_qubits=q.num_vars,
        constant=constant,
        h={i: c for i, c in sorted(h.items()) if c != 0},
        J={k: c for k, c in sorted(J.items()) if c != 0},
    )


def energy(h: IsingHamiltonian, s: str | Sequence[int]) -> float:
    return h.energy(s)


def diagonal_energies(h: IsingHamiltonian, cap: int | None = None, chunk: int = 1 << 20) -> np.ndarray:
    """Energy of every computational-basis state, indexed by basis index."""
    cap = qubit_cap() if cap is None else cap
    n = h.num_qubits
    if n > cap:
        raise ValueError(f"{n} qubits exceeds the statevector cap of {cap}")
    size = 1 << n
    out = np.empty(size)
    for start in range(0, size, chunk):
        out[start:start + chunk] = h.energies_of(np.arange(start, min(size, start + chunk), dtype=np.int64))
    return out
