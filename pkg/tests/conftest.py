import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from friedrichs.model import scalar_example, two_by_two_example
from friedrichs.resonances import global_search
from friedrichs.scattering import collect_residues

settings.register_profile("default", max_examples=30, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def scalar():
    return scalar_example(0.5)


@pytest.fixture(scope="session")
def scalar_weak():
    return scalar_example(0.05)


@pytest.fixture(scope="session")
def two():
    return two_by_two_example(0.5)


@pytest.fixture(scope="session", params=["scalar", "scalar_weak", "two"])
def model(request):
    return request.getfixturevalue(request.param)


_CACHE = {}


def search(spec):
    """Global resonance search and residues, cached per model object."""
    key = id(spec)
    if key not in _CACHE:
        res = global_search(spec)
        _CACHE[key] = (spec, res, collect_residues(spec, res))
    return _CACHE[key][1], _CACHE[key][2]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


# ------------------------------------------------------------------ acceptance report

ACCEPTANCE_LINES = {}


def report(number, passed, detail):
    """Record and print one pass/fail line for an acceptance criterion."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
