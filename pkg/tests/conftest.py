import functools

import pytest

from hetsched.fixtures import arm_platform, constrained_tasksets, implicit_tasksets
from hetsched.pipeline import run_algorithm


@pytest.fixture(scope="session")
def big_little():
    return arm_platform(2, 6)


@pytest.fixture(scope="session")
def one_one():
    return arm_platform(1, 1)


@pytest.fixture(scope="session")
def implicit():
    return implicit_tasksets()


@pytest.fixture(scope="session")
def constrained():
    return constrained_tasksets()


@functools.lru_cache(maxsize=None)
def cached_run(kind: str, density: float, algorithm: str, big: int, little: int):
    """Pipeline results shared between test modules (runs are deterministic)."""
    tasks = (implicit_tasksets() if kind == "implicit" else constrained_tasksets())[density]
    return run_algorithm(tasks, arm_platform(big, little), algorithm)


ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str):
    """Store and print one acceptance line; the summary hook repeats them."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
