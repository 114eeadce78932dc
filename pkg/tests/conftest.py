import numpy as np
import pytest

from scvxpdg.scenario import load_fixture
from scvxpdg.scvx import scvx_solve

_cache = {}


def solved(name):
    """Converged (or not) solution of a bundled fixture, cached per session."""
    if name not in _cache:
        sc = load_fixture(name)
        _cache[name] = (sc, scvx_solve(sc))
    return _cache[name]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


# one verdict line per acceptance criterion, collected by test_acceptance.py
ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
