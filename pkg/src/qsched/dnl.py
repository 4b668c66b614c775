"""Debiasing with non-linear filtering over symmetrized circuit variants.

Each variant measures the same logical state through a different
logical-to-physical slot map and a different set of final NOT gates, so
slot-dependent readout bias lands on different bitstrings in different
variants. Aggregation keeps outcomes that most variants agree on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .ising import IsingHamiltonian, index_to_bitstring
from .simulator import NoiseModel, SampleSet, Statevector, sample_indices, samples_from_indices


class FilterError(ValueError):
    """Raised when filtering leaves no probability mass."""


@dataclass(frozen=True)
class DnlConfig:
    alpha: float = 4.0
    v_th: int = 2
    v_max: int = 25

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0 <= self.v_th <= self.v_max:
            raise ValueError("need 0 <= v_th <= v_max")


@dataclass
class Variant:
    slot_map: tuple[int, ...]
    not_mask: tuple[int, ...]
    samples: SampleSet

    def probabilities(self) -> dict[str, float]:
        return self.samples.probabilities()


@dataclass
class VariantSet:
    variants: list[Variant] = field(default_factory=list)

    @property
    def v_max(self) -> int:
        return len(self.variants)

    def to_dicts(self) -> list[dict]:
        return [
            {"slot_map": list(v.slot_map), "not_mask": list(v.not_mask), **v.samples.to_dict()}
            for v in self.variants
        ]

    @classmethod
    def from_dicts(cls, items: list[dict]) -> "VariantSet":
        out = []
        for d in items:
            out.append(Variant(tuple(d.get("slot_map", ())), tuple(d.get("not_mask", ())), SampleSet.from_dict(d)))
        return cls(out)


def run_variant(
    sv: Statevector,
    shots: int,
    rng: np.random.Generator,
    noise: NoiseModel | None,
    slot_map: np.ndarray,
    not_mask: np.ndarray,
    h: IsingHamiltonian | None = None,
) -> SampleSet:
    """X on masked qubits, noisy readout through ``slot_map``, classical un-flip of the mask."""
    n = sv.num_qubits
    state = sv.copy()
    for q in np.flatnonzero(not_mask):
        state.apply_x(int(q))
    idx = sample_indices(state.probabilities(), shots, rng)
    bits = ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
    if noise is not None:
        bits = noise.remapped(slot_map).apply(bits, rng)
    bits ^= np.asarray(not_mask, dtype=np.int64)[None, :]
    return samples_from_indices((bits << np.arange(n)[None, :]).sum(axis=1), n, h)


def generate_variants(
    circuit_runner: Callable[[], Statevector] | Statevector,
    v_max: int,
    shots: int,
    seed: int | np.random.Generator | None = None,
    noise: NoiseModel | None = None,
    h: IsingHamiltonian | None = None,
) -> VariantSet:
    """Run ``v_max`` variants with random slot permutations and random final-NOT masks.

    ``circuit_runner`` returns the ideal pre-measurement state (or is that state).
    ``shots`` is per variant.
    """
    if v_max < 1:
        raise ValueError("v_max must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(v_max):
        sv = circuit_runner if isinstance(circuit_runner, Statevector) else circuit_runner()
        n = sv.num_qubits
        n_slots = noise.flip01.size if noise is not None else n
        slot_map = rng.permutation(n_slots)[:n]
        not_mask = rng.integers(0, 2, size=n)
        samples = run_variant(sv, shots, rng, noise, slot_map, not_mask, h)
        out.append(Variant(tuple(int(s) for s in slot_map), tuple(int(b) for b in not_mask), samples))
    return VariantSet(out)


def weight(v: int, cfg: DnlConfig) -> float:
    """(v / v_max)^alpha above the threshold, 0 at or below it."""
    if not 0 <= v <= cfg.v_max:
        raise ValueError(f"variant count {v} outside 0..{cfg.v_max}")
    if v <= cfg.v_th:
        return 0.0
    return (v / cfg.v_max) ** cfg.alpha


class Aggregator(Protocol):
    def __call__(self, vs: VariantSet, cfg: DnlConfig) -> dict[str, float]: ...


def mean_weighted(vs: VariantSet, cfg: DnlConfig) -> dict[str, float]:
    """Variant-mean probability times W(number of variants that saw the bitstring), renormalised."""
    probs = [v.probabilities() for v in vs.variants]
    keys = sorted(set().union(*probs))
    mass = {}
    for b in keys:
        ps = [p.get(b, 0.0) for p in probs]
        seen = sum(1 for x in ps if x > 0)
        w = weight(seen, cfg)
        if w > 0:
            mass[b] = w * sum(ps) / cfg.v_max
    total = sum(mass.values())
    if total <= 0:
        raise FilterError(
            f"every outcome was filtered out (v_th={cfg.v_th}, v_max={cfg.v_max}); lower v_th"
        )
    return {b: m / total for b, m in mass.items()}


def aggregate(vs: VariantSet, cfg: DnlConfig | None = None, strategy: Aggregator = mean_weighted) -> dict[str, float]:
    if not vs.variants:
        raise ValueError("empty variant set")
    cfg = cfg or DnlConfig(v_max=vs.v_max)
    if cfg.v_max != vs.v_max:
        raise ValueError(f"config v_max={cfg.v_max} but {vs.v_max} variants were given")
    return strategy(vs, cfg)


def plain_mean(vs: VariantSet) -> dict[str, float]:
    """Unmitigated reference: the average distribution over variants."""
    probs = [v.probabilities() for v in vs.variants]
    keys = sorted(set().union(*probs))
    return {b: sum(p.get(b, 0.0) for p in probs) / len(probs) for b in keys}


def mass_where(dist: dict[str, float], pred: Callable[[str], bool]) -> float:
    return sum(p for b, p in dist.items() if pred(b))


def distribution_from_statevector(sv: Statevector, cutoff: float = 0.0) -> dict[str, float]:
    probs = sv.probabilities()
    return {index_to_bitstring(int(k), sv.num_qubits): float(probs[k]) for k in np.flatnonzero(probs > cutoff)}
