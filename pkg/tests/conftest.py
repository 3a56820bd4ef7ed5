import functools

import numpy as np
import pytest

from heckepair.arith import PrimeWindow, first_primes
from heckepair.paircorr import AngleSet


@functools.lru_cache(maxsize=None)
def _delta(n_max):
    from heckepair.data import delta_series
    return delta_series(n_max)


@pytest.fixture(scope="session")
def delta_1000():
    return _delta(1000)


@pytest.fixture(scope="session")
def delta_200(delta_1000):
    from heckepair.data import angles_from_series
    return angles_from_series(delta_1000, 200)


def synthetic(n, seed, model="sato_tate"):
    """Seeded angle set on the first ``n`` primes."""
    from heckepair.montecarlo import SampleConfig, sample_angles
    return sample_angles(SampleConfig(n, seed, model))


def manual(angles, x=None):
    th = np.asarray(angles, dtype=float)
    ps = first_primes(th.size) if th.size else np.zeros(0, dtype=np.int64)
    return AngleSet("manual", PrimeWindow(int(ps[-1]) if th.size else 1, 1, ps), th)


@pytest.fixture
def cache_root(tmp_path, monkeypatch):
    monkeypatch.setenv("HECKEPAIR_CACHE_DIR", str(tmp_path))
    return str(tmp_path)


@pytest.fixture(scope="session")
def delta_1e5():
    return _delta(100_000)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
