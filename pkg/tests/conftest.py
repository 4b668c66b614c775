import numpy as np
import pytest

from qsched.ising import IsingHamiltonian, qubo_to_ising
from qsched.jssp import QuboProblem, build_qubo, synthetic_sub_instance


def random_ising(n: int, rng: np.random.Generator, scale: float = 1.0, density: float = 1.0) -> IsingHamiltonian:
    h = {q: float(rng.uniform(-scale, scale)) for q in range(n)}
    J = {
        (a, b): float(rng.uniform(-scale, scale))
        for a in range(n)
        for b in range(a + 1, n)
        if rng.random() < density
    }
    return IsingHamiltonian(n, float(rng.uniform(-scale, scale)), h, J)


def random_qubo(n: int, rng: np.random.Generator, lo: int = -5, hi: int = 5) -> QuboProblem:
    linear = {i: int(rng.integers(lo, hi + 1)) for i in range(n)}
    quadratic = {(i, j): int(rng.integers(lo, hi + 1)) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5}
    return QuboProblem(n, linear, quadratic, int(rng.integers(0, 10)))


@pytest.fixture(scope="session")
def sub12():
    return synthetic_sub_instance(12)


@pytest.fixture(scope="session")
def sub16():
    return synthetic_sub_instance(16)


@pytest.fixture(scope="session")
def ham16(sub16):
    return qubo_to_ising(build_qubo(sub16))


# -- acceptance report -------------------------------------------------------
# Acceptance tests record (criterion, ok, detail) parts here; the terminal
# summary prints one line per criterion.

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(d if ok else f"[failed] {d}" for ok, d in parts)
        terminalreporter.write_line(f"criterion {c:>2}: {status}  {detail}")
