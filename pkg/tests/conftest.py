import numpy as np
import pytest

ACCEPTANCE = []


def zero_mean_sine(omega, T, amplitude=1.0):
    """Sine whose phase makes the sample mean over ``0..T-1`` exactly zero.

    Mean removal then leaves the signal unchanged, so it stays an exact
    AR(2) sequence after sphering.
    """
    t = np.arange(T)
    phase = -np.angle(np.exp(1j * omega * t).sum())
    return amplitude * np.sin(omega * t + phase)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(name, passed, detail=""):
        ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line("%s %s  %s" % ("PASS" if passed else "FAIL", name, detail))
