import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


def random_weighted(n, rng, density=0.5):
    w = rng.uniform(0.1, 2.0, size=(n, n)) * (rng.random((n, n)) < density)
    w = np.triu(w, 1)
    return w + w.T


def random_ds(n, rng, sweeps=200):
    """Strictly interior doubly stochastic matrix."""
    X = rng.uniform(0.2, 1.0, size=(n, n))
    for _ in range(sweeps):
        X /= X.sum(1, keepdims=True)
        X /= X.sum(0, keepdims=True)
    return X


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return DATA


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria (slow)")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
