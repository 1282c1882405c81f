import time
from contextlib import contextmanager

import numpy as np
import pytest

from scenagg.io import fixture_path, load_network, load_scenarios


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running end-to-end checks")


@pytest.fixture(scope="session")
def year():
    return load_scenarios(fixture_path("synthetic_year.csv"))


@pytest.fixture(scope="session")
def garver(year):
    return load_network(fixture_path("garver6.yaml"), year.channel_labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    @contextmanager
    def check(number, title):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            ACCEPTANCE[number] = f"FAIL  criterion {number:2d}: {title} ({type(exc).__name__}: {exc})"
            print(ACCEPTANCE[number])
            raise
        ACCEPTANCE[number] = f"PASS  criterion {number:2d}: {title} [{time.perf_counter() - t0:.1f} s]"
        print(ACCEPTANCE[number])

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
