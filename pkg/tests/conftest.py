import numpy as np
import pytest

from macbounds.model import ClassicalMAC, CodebookPair, Distribution, joint_from_setting1


def adder_w() -> np.ndarray:
    w = np.zeros((2, 2, 3))
    for a in range(2):
        for b in range(2):
            w[a, b, a + b] = 1.0
    return w


def noiseless_w() -> np.ndarray:
    w = np.zeros((2, 2, 4))
    for a in range(2):
        for b in range(2):
            w[a, b, 2 * a + b] = 1.0
    return w


@pytest.fixture
def adder():
    return ClassicalMAC(adder_w())


@pytest.fixture
def noiseless():
    return ClassicalMAC(noiseless_w())


@pytest.fixture
def adder_joint(adder):
    return joint_from_setting1(Distribution.uniform(2, 2), adder)


@pytest.fixture
def full_code():
    return CodebookPair((0, 1), (0, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, ok: bool, detail: str):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
