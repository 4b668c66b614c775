"""Just-in-Time job shop instances, cost terms, sub-instance freezing and QUBO compilation.

Machines, jobs and time slots are 1-indexed everywhere in the public API so
that a variable ``(m, j, t)`` reads the same as ``x_mjt``. Arrays are stored
0-indexed with shape ``(M, J, max(T_m))``; cells past ``T_m`` are always zero.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Var = tuple[int, int, int]


class InstanceError(ValueError):
    """Raised when an instance or sub-instance violates a construction rule."""


@dataclass(frozen=True)
class JsspInstance:
    num_machines: int
    num_jobs: int
    time_slots: tuple[int, ...]
    production_groups: tuple[tuple[str, ...], ...]
    due_times: tuple[int, ...]
    c_e: int = 1
    c_l: int = 3
    c_p: int = 5
    penalty: int = 10
    idle_slots: tuple[frozenset[int], ...] = ()

    def __post_init__(self):
        M, J = self.num_machines, self.num_jobs
        if M < 1 or J < 1:
            raise InstanceError("need at least one machine and one job")
        object.__setattr__(self, "time_slots", tuple(int(t) for t in self.time_slots))
        object.__setattr__(
            self, "production_groups", tuple(tuple(str(g) for g in row) for row in self.production_groups)
        )
        object.__setattr__(self, "due_times", tuple(int(d) for d in self.due_times))
        idle = self.idle_slots or tuple(frozenset() for _ in range(M))
        object.__setattr__(self, "idle_slots", tuple(frozenset(int(t) for t in s) for s in idle))

        if len(self.time_slots) != M or len(self.idle_slots) != M:
            raise InstanceError("time_slots and idle_slots need one entry per machine")
        if len(self.production_groups) != M or any(len(r) != J for r in self.production_groups):
            raise InstanceError("production_groups must be a machines x jobs table")
        if len(self.due_times) != J:
            raise InstanceError("due_times needs one entry per job")
        for m, (T, idle_m) in enumerate(zip(self.time_slots, self.idle_slots), start=1):
            if not idle_m <= set(range(1, T + 1)):
                raise InstanceError(f"idle slots of machine {m} fall outside 1..{T}")
            if T - len(idle_m) != J:
                raise InstanceError(f"machine {m} has {T - len(idle_m)} active slots, expected {J}")
        tmax = max(self.time_slots)
        if any(not 1 <= d <= tmax for d in self.due_times):
            raise InstanceError(f"due times must lie in 1..{tmax}")

    @property
    def max_slots(self) -> int:
        return max(self.time_slots)

    @property
    def active_slots(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(t for t in range(1, T + 1) if t not in idle)
            for T, idle in zip(self.time_slots, self.idle_slots)
        )

    @property
    def num_variables(self) -> int:
        return self.num_jobs * sum(self.time_slots)

    def variables(self) -> list[Var]:
        """Every ``(m, j, t)`` index of the instance in lexicographic order."""
        return [
            (m, j, t)
            for m in range(1, self.num_machines + 1)
            for j in range(1, self.num_jobs + 1)
            for t in range(1, self.time_slots[m - 1] + 1)
        ]

    def is_variable(self, v: Var) -> bool:
        m, j, t = v
        return 1 <= m <= self.num_machines and 1 <= j <= self.num_jobs and 1 <= t <= self.time_slots[m - 1]

    def switch_matrix(self, m: int) -> np.ndarray:
        """``G[j1, j2] = 1`` when jobs j1 and j2 belong to different production groups on machine m."""
        groups = np.array(self.production_groups[m - 1])
        return (groups[:, None] != groups[None, :]).astype(np.int64)

    def delivery_weights(self) -> np.ndarray:
        """Per-(job, slot) early/late cost for finishing on the last machine, shape ``(J, T_M)``."""
        T = self.time_slots[-1]
        t = np.arange(1, T + 1)[None, :]
        d = np.array(self.due_times)[:, None]
        return np.where(t <= d, self.c_e * (d - t), self.c_l * (t - d)).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "machines": self.num_machines,
            "jobs": self.num_jobs,
            "time_slots": list(self.time_slots),
            "production_groups": [list(r) for r in self.production_groups],
            "due_times": list(self.due_times),
            "costs": {"c_e": self.c_e, "c_l": self.c_l, "c_p": self.c_p, "lambda": self.penalty},
            "idle_slots": [sorted(s) for s in self.idle_slots],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JsspInstance":
        costs = data.get("costs", {})
        return cls(
            num_machines=data["machines"],
            num_jobs=data["jobs"],
            time_slots=tuple(data["time_slots"]),
            production_groups=tuple(tuple(r) for r in data["production_groups"]),
            due_times=tuple(data["due_times"]),
            c_e=costs.get("c_e", 1),
            c_l=costs.get("c_l", 3),
            c_p=costs.get("c_p", 5),
            penalty=costs.get("lambda", 10),
            idle_slots=tuple(frozenset(s) for s in data["idle_slots"]),
        )


class ScheduleAssignment:
    """Binary values of every ``x_mjt`` of an instance."""

    def __init__(self, instance: JsspInstance, x: np.ndarray | None = None):
        self.instance = instance
        shape = (instance.num_machines, instance.num_jobs, instance.max_slots)
        if x is None:
            x = np.zeros(shape, dtype=np.int64)
        x = np.asarray(x, dtype=np.int64)
        if x.shape != shape:
            raise InstanceError(f"assignment shape {x.shape} != {shape}")
        if not np.isin(x, (0, 1)).all():
            raise InstanceError("assignment values must be 0 or 1")
        for m, T in enumerate(instance.time_slots):
            if x[m, :, T:].any():
                raise InstanceError(f"machine {m + 1} has values past its last slot {T}")
        self.x = x

    @classmethod
    def from_ones(cls, instance: JsspInstance, ones: Iterable[Sequence[int]]) -> "ScheduleAssignment":
        x = np.zeros((instance.num_machines, instance.num_jobs, instance.max_slots), dtype=np.int64)
        for m, j, t in ones:
            if not instance.is_variable((m, j, t)):
                raise InstanceError(f"({m},{j},{t}) is not a variable of this instance")
            x[m - 1, j - 1, t - 1] = 1
        return cls(instance, x)

    @classmethod
    def from_sequences(cls, instance: JsspInstance, sequences: Sequence[Sequence[int]]) -> "ScheduleAssignment":
        """Place ``sequences[m]`` (job ids) on the active slots of machine m in order."""
        ones = []
        for m, (seq, slots) in enumerate(zip(sequences, instance.active_slots), start=1):
            if sorted(seq) != list(range(1, instance.num_jobs + 1)):
                raise InstanceError(f"machine {m} sequence is not a permutation of the jobs")
            ones.extend((m, j, t) for j, t in zip(seq, slots))
        return cls.from_ones(instance, ones)

    def __getitem__(self, v: Var) -> int:
        m, j, t = v
        return int(self.x[m - 1, j - 1, t - 1])

    def ones(self) -> list[Var]:
        return [(int(m) + 1, int(j) + 1, int(t) + 1) for m, j, t in np.argwhere(self.x)]

    def start_slot(self, m: int, j: int) -> int | None:
        slots = np.flatnonzero(self.x[m - 1, j - 1])
        return int(slots[0]) + 1 if len(slots) == 1 else None

    def __eq__(self, other) -> bool:
        return isinstance(other, ScheduleAssignment) and np.array_equal(self.x, other.x)

    def __repr__(self) -> str:
        return f"ScheduleAssignment(ones={self.ones()})"


def build_full_instance() -> JsspInstance:
    """The 20-job, 3-machine master instance used throughout the hardware study."""
    groups = (
        "A B C D C B C D C B C D A B C D D B C D".split(),
        "A A B B C D A B D C D C D D A A B B D B".split(),
        "B B B A A A C C B D D A A A B D B D C B".split(),
    )
    return JsspInstance(
        num_machines=3,
        num_jobs=20,
        time_slots=(20, 22, 23),
        production_groups=tuple(tuple(g) for g in groups),
        due_times=(3, 3, 5, 6, 6, 8, 10, 11, 11, 12, 13, 13, 15, 17, 17, 19, 20, 20, 21, 21),
        c_e=1,
        c_l=3,
        c_p=5,
        penalty=10,
        idle_slots=(frozenset(), frozenset({1, 22}), frozenset({1, 2, 23})),
    )


def edd_base(instance: JsspInstance) -> ScheduleAssignment:
    """Feasible schedule that runs jobs in earliest-due-date order on every machine.

    Only a convenience starting point; it is not the optimum of anything.
    """
    order = sorted(range(1, instance.num_jobs + 1), key=lambda j: (instance.due_times[j - 1], j))
    base = ScheduleAssignment.from_sequences(instance, [order] * instance.num_machines)
    if not is_feasible(instance, base):
        raise InstanceError("active slots do not admit a shifted common sequence")
    return base


def makespan_bounds(proc_times) -> tuple[int, int]:
    """``(T_min, T_max)`` for a jobs x machines table of processing times."""
    p = np.asarray(proc_times)
    if p.size == 0 or p.ndim != 2 or p.shape[0] == 0:
        raise ValueError("need at least one job")
    if (p < 0).any():
        raise ValueError("processing times must be nonnegative")
    per_job = p.sum(axis=1)
    return per_job.max().item(), per_job.sum().item()


# ---------------------------------------------------------------------------
# Cost terms, evaluated directly on a full assignment
# ---------------------------------------------------------------------------

def earliness_lateness_cost(instance: JsspInstance, assignment: ScheduleAssignment, j: int) -> int:
    T = instance.time_slots[-1]
    row = assignment.x[-1, j - 1, :T]
    return int(instance.delivery_weights()[j - 1] @ row)


def switching_cost(instance: JsspInstance, assignment: ScheduleAssignment, m: int) -> int:
    T = instance.time_slots[m - 1]
    xm = assignment.x[m - 1, :, :T]
    G = instance.switch_matrix(m)
    # sum_t x[:, t]^T G x[:, t+1]
    return int(instance.c_p * np.einsum("at,ab,bt->", xm[:, :-1], G, xm[:, 1:]))


def constraint_penalties(instance: JsspInstance, assignment: ScheduleAssignment) -> tuple[int, int, int]:
    """Unweighted (job assignment, time assignment, process order) penalty sums."""
    x = assignment.x
    job_assign = int(((x.sum(axis=2) - 1) ** 2).sum())

    time_assign = 0
    for m, (T, idle) in enumerate(zip(instance.time_slots, instance.idle_slots)):
        load = x[m, :, :T].sum(axis=0)
        target = np.ones(T, dtype=np.int64)
        target[[t - 1 for t in idle]] = 0
        time_assign += int(((load - target) ** 2).sum())

    # a job starting at t on machine m must not start at any t' <= t on machine m+1
    order = 0
    for m in range(instance.num_machines - 1):
        T, T_next = instance.time_slots[m], instance.time_slots[m + 1]
        cum_next = np.cumsum(x[m + 1, :, :T_next], axis=1)
        idx = np.minimum(np.arange(T), T_next - 1)
        order += int((x[m, :, :T] * cum_next[:, idx]).sum())
    return job_assign, time_assign, order


def schedule_cost(instance: JsspInstance, assignment: ScheduleAssignment) -> int:
    """Delivery plus switching cost, without penalties."""
    u = sum(earliness_lateness_cost(instance, assignment, j) for j in range(1, instance.num_jobs + 1))
    s = sum(switching_cost(instance, assignment, m) for m in range(1, instance.num_machines + 1))
    return u + s


def total_cost(instance: JsspInstance, assignment: ScheduleAssignment) -> int:
    return schedule_cost(instance, assignment) + instance.penalty * sum(constraint_penalties(instance, assignment))


def is_feasible(instance: JsspInstance, assignment: ScheduleAssignment) -> bool:
    return sum(constraint_penalties(instance, assignment)) == 0


# ---------------------------------------------------------------------------
# Sub-instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubInstance:
    base: JsspInstance
    frozen: dict[Var, int]
    free_vars: tuple[Var, ...]
    base_assignment: ScheduleAssignment | None = field(default=None, compare=False, repr=False)
    free_spec: tuple[int, ...] = ()
    refrozen: tuple[Var, ...] = ()

    def __post_init__(self):
        fv = tuple(tuple(v) for v in self.free_vars)
        if list(fv) != sorted(set(fv)):
            raise InstanceError("free_vars must be unique and sorted by (m, j, t)")
        if set(fv) & self.frozen.keys():
            raise InstanceError("a variable cannot be both free and frozen")
        object.__setattr__(self, "free_vars", fv)

    @property
    def n_var(self) -> int:
        return len(self.free_vars)

    def qubit_index(self) -> dict[Var, int]:
        return {v: i for i, v in enumerate(self.free_vars)}

    def merge(self, bits: Sequence[int]) -> ScheduleAssignment:
        """Full assignment from the frozen values plus ``bits`` on the free variables."""
        if len(bits) != self.n_var:
            raise InstanceError(f"expected {self.n_var} bits, got {len(bits)}")
        x = np.zeros((self.base.num_machines, self.base.num_jobs, self.base.max_slots), dtype=np.int64)
        for (m, j, t), val in self.frozen.items():
            x[m - 1, j - 1, t - 1] = val
        for (m, j, t), b in zip(self.free_vars, bits):
            x[m - 1, j - 1, t - 1] = int(b)
        return ScheduleAssignment(self.base, x)

    def restrict(self, assignment: ScheduleAssignment) -> list[int]:
        """Bits of ``assignment`` on the free variables, in qubit order."""
        return [assignment[v] for v in self.free_vars]

    def to_dict(self) -> dict:
        data = self.base.to_dict()
        if self.base_assignment is not None:
            data["base_assignment"] = [list(v) for v in self.base_assignment.ones()]
        data["free_spec"] = {"n": list(self.free_spec), "refreeze": [list(v) for v in self.refrozen]}
        return data


def derive_sub_instance(
    instance: JsspInstance,
    base: ScheduleAssignment,
    free_spec: Sequence[int],
    refreeze: Iterable[Sequence[int]] = (),
) -> SubInstance:
    """Free the last ``n_m`` active slots of each machine together with the jobs ``base`` puts there.

    Every other variable, idle positions included, is frozen to its base value.
    Each entry of ``refreeze`` removes one more free variable, frozen to 0.
    """
    n = [int(k) for k in free_spec]
    if len(n) != instance.num_machines:
        raise InstanceError(f"free spec needs {instance.num_machines} entries, got {len(n)}")
    if any(k < 0 for k in n):
        raise InstanceError("free slot counts must be nonnegative")
    if any(a < b for a, b in zip(n, n[1:])):
        raise InstanceError(f"free slots must be non-increasing across machines (n1 >= n2 >= ...), got {n}")
    for m, (k, T) in enumerate(zip(n, instance.time_slots), start=1):
        if k > T:
            raise InstanceError(f"machine {m}: cannot free {k} slots, it only has {T}")
        if k > instance.num_jobs:
            raise InstanceError(f"machine {m}: cannot free {k} slots, it only has {instance.num_jobs} active slots")
    if base.instance != instance:
        raise InstanceError("base assignment belongs to a different instance")
    if not is_feasible(instance, base):
        raise InstanceError("base assignment is not feasible")

    free: set[Var] = set()
    for m, (k, slots) in enumerate(zip(n, instance.active_slots), start=1):
        if k == 0:
            continue
        free_slots = slots[-k:]
        jobs = [j for j in range(1, instance.num_jobs + 1) if base.start_slot(m, j) in free_slots]
        free.update((m, j, t) for j in jobs for t in free_slots)

    refrozen: list[Var] = []
    for v in refreeze:
        v = tuple(int(a) for a in v)
        if v not in free:
            raise InstanceError(f"cannot refreeze {v}: it is not a free variable")
        if base[v] != 0:
            raise InstanceError(f"cannot refreeze {v}: its base value is 1, only zero-valued variables may be refrozen")
        free.discard(v)
        refrozen.append(v)

    frozen = {v: base[v] for v in instance.variables() if v not in free}
    return SubInstance(
        base=instance,
        frozen=frozen,
        free_vars=tuple(sorted(free)),
        base_assignment=base,
        free_spec=tuple(n),
        refrozen=tuple(refrozen),
    )


def sub_instance_from_dict(data: dict) -> SubInstance:
    instance = JsspInstance.from_dict(data)
    if "base_assignment" not in data:
        raise InstanceError("sub-instance file needs a base_assignment")
    base = ScheduleAssignment.from_ones(instance, data["base_assignment"])
    spec = data.get("free_spec", {})
    return derive_sub_instance(instance, base, spec.get("n", []), spec.get("refreeze", []))


# ---------------------------------------------------------------------------
# QUBO
# ---------------------------------------------------------------------------

@dataclass
class QuboProblem:
    num_vars: int
    linear: dict[int, int | float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], int | float] = field(default_factory=dict)
    offset: int | float = 0

    def __post_init__(self):
        quad = {}
        for (i, j), c in self.quadratic.items():
            if i == j:
                raise ValueError(f"quadratic key ({i},{j}) repeats an index")
            key = (min(i, j), max(i, j))
            quad[key] = quad.get(key, 0) + c
        self.quadratic = quad
        for i in itertools.chain(self.linear, *self.quadratic):
            if not 0 <= i < self.num_vars:
                raise ValueError(f"variable index {i} out of range")

    def energy(self, bits: Sequence[int]):
        if len(bits) != self.num_vars:
            raise ValueError(f"expected {self.num_vars} bits, got {len(bits)}")
        e = self.offset
        for i, c in self.linear.items():
            if bits[i]:
                e += c
        for (i, j), c in self.quadratic.items():
            if bits[i] and bits[j]:
                e += c
        return e

    def energies(self, bits: np.ndarray) -> np.ndarray:
        """Energies of a batch of assignments, shape ``(n_samples, num_vars)``."""
        b = np.asarray(bits)
        dtype = np.int64 if self._is_integral() else np.float64
        e = np.full(b.shape[0], self.offset, dtype=dtype)
        for i, c in self.linear.items():
            e += c * b[:, i]
        for (i, j), c in self.quadratic.items():
            e += c * (b[:, i] & b[:, j])
        return e

    def _is_integral(self) -> bool:
        return all(
            isinstance(c, (int, np.integer))
            for c in itertools.chain([self.offset], self.linear.values(), self.quadratic.values())
        )

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "offset": self.offset,
            "linear": {str(i): c for i, c in sorted(self.linear.items())},
            "quadratic": {f"{i},{j}": c for (i, j), c in sorted(self.quadratic.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuboProblem":
        quad = {}
        for key, c in data.get("quadratic", {}).items():
            i, j = (int(a) for a in key.split(","))
            quad[(i, j)] = c
        return cls(
            num_vars=int(data["num_vars"]),
            linear={int(i): c for i, c in data.get("linear", {}).items()},
            quadratic=quad,
            offset=data.get("offset", 0),
        )


class _Poly:
    """Accumulates a degree-2 polynomial over free variables; frozen ones are substituted."""

    def __init__(self, index: dict[Var, int], frozen: dict[Var, int]):
        self.index = index
        self.frozen = frozen
        self.offset = 0
        self.linear: dict[int, int] = {}
        self.quadratic: dict[tuple[int, int], int] = {}

    def _split(self, terms: Iterable[tuple[int, Var]]) -> tuple[list[tuple[int, int]], int]:
        free, const = [], 0
        for c, v in terms:
            if v in self.index:
                free.append((c, self.index[v]))
            else:
                const += c * self.frozen.get(v, 0)
        return free, const

    def add_linear(self, i: int, c: int):
        if c:
            self.linear[i] = self.linear.get(i, 0) + c

    def add_quadratic(self, i: int, k: int, c: int):
        if not c:
            return
        if i == k:  # x^2 = x for binaries
            self.add_linear(i, c)
            return
        key = (min(i, k), max(i, k))
        self.quadratic[key] = self.quadratic.get(key, 0) + c

    def add_form(self, terms: Iterable[tuple[int, Var]], scale: int = 1):
        """Add ``scale * sum(c * x_v)``."""
        free, const = self._split(terms)
        self.offset += scale * const
        for c, i in free:
            self.add_linear(i, scale * c)

    def add_product(self, c: int, u: Var, v: Var):
        """Add ``c * x_u * x_v``."""
        (fu, cu), (fv, cv) = self._split([(1, u)]), self._split([(1, v)])
        if fu and fv:
            self.add_quadratic(fu[0][1], fv[0][1], c)
        elif fu:
            self.add_linear(fu[0][1], c * cv)
        elif fv:
            self.add_linear(fv[0][1], c * cu)
        else:
            self.offset += c * cu * cv

    def add_square(self, terms: Iterable[tuple[int, Var]], const: int, scale: int):
        """Add ``scale * (sum(c * x_v) + const)^2``."""
        free, b = self._split(terms)
        b += const
        self.offset += scale * b * b
        for a, i in free:
            self.add_linear(i, scale * (a * a + 2 * a * b))
        for (a, i), (a2, k) in itertools.combinations(free, 2):
            self.add_quadratic(i, k, scale * 2 * a * a2)

    def touches_free(self, vars_: Iterable[Var]) -> bool:
        return any(v in self.index for v in vars_)


def build_qubo(sub: SubInstance) -> QuboProblem:
    """Compile the penalised cost of ``sub`` into a QUBO over its free variables."""
    inst = sub.base
    M, J = inst.num_machines, inst.num_jobs
    poly = _Poly(sub.qubit_index(), sub.frozen)
    lam = inst.penalty

    # delivery cost on the last machine
    weights = inst.delivery_weights()
    T_last = inst.time_slots[-1]
    for j in range(1, J + 1):
        poly.add_form((int(weights[j - 1, t - 1]), (M, j, t)) for t in range(1, T_last + 1))

    # production switching
    for m in range(1, M + 1):
        G = inst.switch_matrix(m)
        for t in range(1, inst.time_slots[m - 1]):
            for j1 in range(1, J + 1):
                for j2 in range(1, J + 1):
                    if G[j1 - 1, j2 - 1]:
                        poly.add_product(inst.c_p, (m, j1, t), (m, j2, t + 1))

    # job assignment: (g_mj - 1)^2
    for m in range(1, M + 1):
        for j in range(1, J + 1):
            poly.add_square(((1, (m, j, t)) for t in range(1, inst.time_slots[m - 1] + 1)), -1, lam)

    # time assignment: (l_mt - 1)^2 on active slots, l_mt^2 on idle ones
    for m in range(1, M + 1):
        idle = inst.idle_slots[m - 1]
        for t in range(1, inst.time_slots[m - 1] + 1):
            poly.add_square(((1, (m, j, t)) for j in range(1, J + 1)), 0 if t in idle else -1, lam)

    # process order
    for m in range(1, M):
        T, T_next = inst.time_slots[m - 1], inst.time_slots[m]
        for j in range(1, J + 1):
            for t in range(1, T + 1):
                for t2 in range(1, min(t, T_next) + 1):
                    poly.add_product(lam, (m, j, t), (m + 1, j, t2))

    return QuboProblem(
        num_vars=sub.n_var,
        linear={i: c for i, c in sorted(poly.linear.items()) if c},
        quadratic={k: c for k, c in sorted(poly.quadratic.items()) if c},
        offset=poly.offset,
    )


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def parse_bits(bits: str | Sequence[int]) -> list[int]:
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        return [int(c) for c in bits]
    return [int(b) for b in bits]


def decode_bitstring(sub: SubInstance, bits: str | Sequence[int]) -> tuple[ScheduleAssignment, bool, int]:
    """Merge qubit values (qubit 0 first) with the frozen part and score the schedule."""
    b = parse_bits(bits)
    if len(b) != sub.n_var:
        raise InstanceError(f"bitstring has {len(b)} bits, sub-instance has {sub.n_var} free variables")
    assignment = sub.merge(b)
    return assignment, is_feasible(sub.base, assignment), total_cost(sub.base, assignment)


def gantt(instance: JsspInstance, assignment: ScheduleAssignment, free_vars: Iterable[Var] = ()) -> str:
    """Text Gantt chart: one row per machine, one column per slot.

    Cells show the job id, ``..`` for an idle slot, ``--`` for an empty active
    slot and ``!!`` for a clash. A ``*`` marks slots holding free variables.
    """
    free_slots = {(m, t) for m, _, t in free_vars}
    width = max(2, len(str(instance.num_jobs)))
    header = "     " + " ".join(f"{t:>{width}} " for t in range(1, instance.max_slots + 1))
    lines = [header.rstrip()]
    for m in range(1, instance.num_machines + 1):
        cells = []
        for t in range(1, instance.max_slots + 1):
            if t > instance.time_slots[m - 1]:
                cells.append(" " * (width + 1))
                continue
            jobs = np.flatnonzero(assignment.x[m - 1, :, t - 1]) + 1
            if len(jobs) > 1:
                cell = "!" * width
            elif len(jobs) == 1:
                cell = f"{jobs[0]:>{width}}"
            elif t in instance.idle_slots[m - 1]:
                cell = "." * width
            else:
                cell = "-" * width
            cells.append(cell + ("*" if (m, t) in free_slots else " "))
        lines.append(f"M{m:<3} " + " ".join(cells).rstrip())
    return "\n".join(lines)


def load_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Synthetic master
# ---------------------------------------------------------------------------

SYNTHETIC_OPTIMUM = 55
_SYNTHETIC_SEQUENCE = (1, 4, 3, 2, 5)

# n_var -> (free spec, number of zero-valued machine-1 variables to refreeze)
SYNTHETIC_PRESETS: dict[int, tuple[tuple[int, int, int], int]] = {
    6: ((2, 1, 1), 0),
    9: ((2, 2, 1), 0),
    11: ((3, 1, 1), 0),
    12: ((2, 2, 2), 0),
    14: ((3, 2, 1), 0),
    16: ((3, 2, 2), 1),
    17: ((3, 2, 2), 0),
}


def synthetic_master() -> JsspInstance:
    """Five jobs on three machines, laid out like the full instance (idle slots at both ends).

    Its unique optimal schedule runs jobs 1, 4, 3, 2, 5 on every machine for a
    cost of 55; ``oracle.schedule_optimum`` certifies this by enumeration.
    """
    return JsspInstance(
        num_machines=3,
        num_jobs=5,
        time_slots=(5, 7, 8),
        production_groups=(tuple("BCDDA"), tuple("ADDAB"), tuple("DBBDB")),
        due_times=(2, 2, 4, 5, 5),
        c_e=1,
        c_l=3,
        c_p=5,
        penalty=10,
        idle_slots=(frozenset(), frozenset({1, 7}), frozenset({1, 2, 8})),
    )


def synthetic_base() -> ScheduleAssignment:
    inst = synthetic_master()
    return ScheduleAssignment.from_sequences(inst, [_SYNTHETIC_SEQUENCE] * inst.num_machines)


def first_refreezable(sub: SubInstance, count: int, machine: int = 1) -> list[Var]:
    """The first ``count`` free variables on ``machine`` whose base value is 0."""
    base = sub.base_assignment
    cands = [v for v in sub.free_vars if v[0] == machine and base[v] == 0]
    if len(cands) < count:
        raise InstanceError(f"machine {machine} has only {len(cands)} refreezable variables")
    return cands[:count]


def synthetic_sub_instance(n_var: int) -> SubInstance:
    """Preset sub-instance of the synthetic master with exactly ``n_var`` free variables."""
    if n_var not in SYNTHETIC_PRESETS:
        raise InstanceError(f"no synthetic preset with {n_var} variables; choose from {sorted(SYNTHETIC_PRESETS)}")
    spec, k = SYNTHETIC_PRESETS[n_var]
    inst, base = synthetic_master(), synthetic_base()
    sub = derive_sub_instance(inst, base, spec)
    if k:
        sub = derive_sub_instance(inst, base, spec, first_refreezable(sub, k))
    return sub
