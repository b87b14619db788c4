import warnings

import numpy as np
import pytest

from quatppf import paper_config, run
from quatppf.config import ConfigWarning

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(code, text): acceptance criterion id and statement")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    code, text = marker.args
    _ACCEPTANCE.append((code, text, call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for code, text, ok in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{code} {'PASS' if ok else 'FAIL'}  {text}")


def random_quaternions(rng, n):
    Q = rng.standard_normal((n, 4))
    return Q / np.linalg.norm(Q, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def noise_free_records():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConfigWarning)
        return run(paper_config(noise_std=0.0))


@pytest.fixture(scope="session")
def noisy_records():
    return run(paper_config())
