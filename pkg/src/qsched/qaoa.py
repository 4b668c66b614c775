"""Linear-ramp QAOA, Boltzmann-weighted bias feedback and the iterative warm-start driver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ising import IsingHamiltonian, diagonal_energies
from .simulator import NoiseModel, SampleSet, Statevector, sample


@dataclass(frozen=True)
class Schedule:
    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        if len(self.betas) != len(self.gammas):
            raise ValueError("betas and gammas must have the same length")

    @property
    def p(self) -> int:
        return len(self.betas)


def linear_ramp(p: int, delta_beta: float, delta_gamma: float | None = None) -> Schedule:
    """beta_k = (1 - k/p) * delta_beta, gamma_k = (k + 1)/p * delta_gamma for k = 0..p-1."""
    if p < 0:
        raise ValueError("p must be >= 0")
    if delta_gamma is None:
        delta_gamma = delta_beta
    if p == 0:
        return Schedule((), ())
    return Schedule(
        betas=tuple((1 - k / p) * delta_beta for k in range(p)),
        gammas=tuple((k + 1) / p * delta_gamma for k in range(p)),
    )


@dataclass(frozen=True)
class InitAngles:
    phis: tuple[float, ...]

    def __post_init__(self):
        if any(not 0 <= f <= math.pi for f in self.phis):
            raise ValueError("R_y angles must lie in [0, pi]")


def bias_to_angles(bias: Sequence[float], eta: int = 1) -> InitAngles:
    """Probability of |1> is ``(1 - eta * <Z>) / 2``; the R_y angle is ``2 asin(sqrt(p))``."""
    if eta not in (1, -1):
        raise ValueError("eta must be +1 or -1")
    z = np.clip(np.asarray(bias, dtype=float), -1.0, 1.0)
    p1 = 0.5 * (1 - eta * z)
    return InitAngles(tuple(float(f) for f in 2 * np.arcsin(np.sqrt(p1))))


def boltzmann_bias(samples: SampleSet, beta_T: float, shot_weighted: bool = False) -> np.ndarray:
    """Thermal <Z_q> over the measured bitstrings.

    Each distinct bitstring gets weight ``exp(-beta_T (E - E_min))``; with
    ``shot_weighted`` the weight is multiplied by its shot count.
    """
    if not samples.counts:
        raise ValueError("empty sample set")
    if beta_T < 0:
        raise ValueError("beta_T must be >= 0")
    keys = sorted(samples.counts)
    e = np.array([samples.energies[b] for b in keys], dtype=float)
    bits = np.array([[int(c) for c in b] for b in keys], dtype=float)
    if math.isinf(beta_T):
        w = (e == e.min()).astype(float)
    else:
        w = np.exp(-beta_T * (e - e.min()))
    if shot_weighted:
        w = w * np.array([samples.counts[b] for b in keys], dtype=float)
    w /= w.sum()
    return w @ (1 - 2 * bits)


def beta_T_schedule(kind: str, beta_min: float, beta_max: float, n_iter: int) -> list[float]:
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if kind == "constant":
        return [float(beta_min)] * n_iter
    if kind != "quadratic":
        raise ValueError(f"unknown beta_T schedule {kind!r}")
    if n_iter == 1:
        return [float(beta_max)]
    return [beta_min + (beta_max - beta_min) * (j / (n_iter - 1)) ** 2 for j in range(n_iter)]


def prepare_initial_state(n: int, init: InitAngles | None) -> Statevector:
    sv = Statevector.zero(n)
    if init is None:
        for q in range(n):
            sv.apply_h(q)
    else:
        if len(init.phis) != n:
            raise ValueError(f"expected {n} init angles, got {len(init.phis)}")
        for q, phi in enumerate(init.phis):
            sv.apply_ry(q, phi)
    return sv


def apply_mixer(sv: Statevector, beta: float, init: InitAngles | None = None):
    """``exp(-i beta H_M)`` with the initial product state as the ground state of H_M.

    Plain mixer: ``H_M = -sum X``, i.e. R_x(-2 beta) on each qubit. Warm-start
    mixer on qubit q: R_y(phi_q) R_z(-2 beta) R_y(-phi_q), which reduces to the
    plain one at phi = pi/2.
    """
    if init is None:
        for q in range(sv.num_qubits):
            sv.apply_rx(q, -2 * beta)
    else:
        for q, phi in enumerate(init.phis):
            sv.apply_ry(q, -phi)
            sv.apply_rz(q, -2 * beta)
            sv.apply_ry(q, phi)
    return sv


def qaoa_state(
    h: IsingHamiltonian,
    sched: Schedule,
    init: InitAngles | None = None,
    mixer: str = "standard",
    energies: np.ndarray | None = None,
) -> Statevector:
    if mixer not in ("standard", "warm_start"):
        raise ValueError(f"unknown mixer {mixer!r}")
    if mixer == "warm_start" and init is None:
        raise ValueError("warm_start mixer needs init angles")
    if energies is None:
        energies = diagonal_energies(h)
    sv = prepare_initial_state(h.num_qubits, init)
    mixer_init = init if mixer == "warm_start" else None
    for beta, gamma in zip(sched.betas, sched.gammas):
        sv.apply_diagonal_phase(gamma * energies)
        apply_mixer(sv, beta, mixer_init)
    return sv


def run_qaoa(
    h: IsingHamiltonian,
    sched: Schedule,
    init: InitAngles | None = None,
    mixer: str = "standard",
    shots: int = 4000,
    seed: int | np.random.Generator | None = None,
    noise: NoiseModel | None = None,
    energies: np.ndarray | None = None,
) -> SampleSet:
    sv = qaoa_state(h, sched, init, mixer, energies)
    return sample(sv, shots, seed, noise, h)


@dataclass
class IterationRecord:
    iteration: int
    init_angles: tuple[float, ...] | None
    beta_T: float
    samples: SampleSet
    best_bitstring: str
    best_energy: float
    mean_energy: float
    ground_state_probability: float | None = None

    def to_dict(self, with_samples: bool = True) -> dict:
        out = {
            "iteration": self.iteration,
            "beta_T": self.beta_T,
            "init_angles": list(self.init_angles) if self.init_angles is not None else None,
            "best_bitstring": self.best_bitstring,
            "best_energy": self.best_energy,
            "mean_energy": self.mean_energy,
            "ground_state_probability": self.ground_state_probability,
        }
        if with_samples:
            out["samples"] = self.samples.to_dict()
        return out


@dataclass
class IterativeConfig:
    p: int = 4
    delta: float = 0.17
    n_iter: int = 10
    beta_T_kind: str = "quadratic"
    beta_T_min: float = 0.1
    beta_T_max: float = 1.0
    eta: int = 1
    shots: int = 4000
    seed: int = 0
    shot_weighted: bool = False
    cumulative: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _merge(a: SampleSet, b: SampleSet) -> SampleSet:
    counts = dict(a.counts)
    for k, c in b.counts.items():
        counts[k] = counts.get(k, 0) + c
    return SampleSet(counts, {**a.energies, **b.energies})


def iterative_qaoa(
    h: IsingHamiltonian,
    cfg: IterativeConfig | None = None,
    noise: NoiseModel | None = None,
    ground_energy: float | None = None,
    energies: np.ndarray | None = None,
) -> list[IterationRecord]:
    """Fixed-schedule QAOA rerun ``n_iter`` times, each warm-started from the last samples.

    Iteration 0 starts from |+>^N with the plain mixer. Every later iteration
    turns the previous samples into a Boltzmann bias, prepares the biased
    product state and uses the matching warm-start mixer.
    """
    cfg = cfg or IterativeConfig()
    sched = linear_ramp(cfg.p, cfg.delta, cfg.delta)
    betas_T = beta_T_schedule(cfg.beta_T_kind, cfg.beta_T_min, cfg.beta_T_max, cfg.n_iter)
    rng = np.random.default_rng(cfg.seed)
    if energies is None:
        energies = diagonal_energies(h)

    records: list[IterationRecord] = []
    feedback: SampleSet | None = None
    best_b, best_e = None, math.inf
    for j in range(cfg.n_iter):
        if feedback is None:
            init, mixer = None, "standard"
        else:
            bias = boltzmann_bias(feedback, betas_T[j - 1], cfg.shot_weighted)
            init, mixer = bias_to_angles(bias, cfg.eta), "warm_start"
        samples = run_qaoa(h, sched, init, mixer, cfg.shots, rng, noise, energies)
        b, e = samples.best()
        if e < best_e or (e == best_e and b < best_b):
            best_b, best_e = b, e
        gs = samples.probability_of_energy(ground_energy) if ground_energy is not None else None
        records.append(IterationRecord(
            iteration=j,
            init_angles=init.phis if init is not None else None,
            beta_T=betas_T[j],
            samples=samples,
            best_bitstring=best_b,
            best_energy=best_e,
            mean_energy=samples.mean_energy(),
            ground_state_probability=gs,
        ))
        feedback = _merge(feedback, samples) if (cfg.cumulative and feedback is not None) else samples
    return records
