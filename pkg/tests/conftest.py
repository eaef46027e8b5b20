import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bergmanlab.experiments import build_transform

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def cached_transform(model, N, background=None, prescale=True):
    """(basis, rule, gram, onb) for a level, shared across the session."""
    return build_transform(model, N, background, prescale=prescale)


@pytest.fixture
def transform():
    return cached_transform


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance reporting ---------------------------------------------------------

SUITE_BUDGET = 300.0  # seconds, whole test session

_acceptance = {}
_session = {}


def pytest_sessionstart(session):
    import time

    _session["start"] = time.perf_counter()


class AcceptanceLog:
    """Records one pass/fail line per acceptance criterion."""

    def __call__(self, key, passed, detail):
        _acceptance[key] = (bool(passed), detail)
        print(f"criterion {key}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    import time

    if not _acceptance:
        return
    elapsed = time.perf_counter() - _session.get("start", time.perf_counter())
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_acceptance, key=lambda k: (int(str(k).split(".")[0]), str(k))):
        passed, detail = _acceptance[key]
        tr.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
    tr.write_line(
        f"criterion 9.runtime: {'PASS' if elapsed < SUITE_BUDGET else 'FAIL'}  "
        f"session wall time {elapsed:.1f} s (budget {SUITE_BUDGET:.0f} s)"
    )


def pytest_sessionfinish(session, exitstatus):
    import time

    elapsed = time.perf_counter() - _session.get("start", time.perf_counter())
    if _acceptance and elapsed > SUITE_BUDGET and exitstatus == 0:
        session.exitstatus = 1
