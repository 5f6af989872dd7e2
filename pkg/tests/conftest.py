from contextlib import contextmanager

import numpy as np
import pytest

from liedeconv.harmonic import FourierCoefficients


def random_coeffs(group, cutoff, rng, real_valued=False):
    """Coefficients with i.i.d. complex Gaussian entries below ``cutoff``."""
    def block(p):
        d = p.dim_pi
        return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))

    c = FourierCoefficients.from_function(group, cutoff, block)
    return c


def assert_mean_within(samples, target, nse=4.0):
    """Entrywise: |mean - target| <= nse * standard error, real and imaginary parts separately."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    target = np.asarray(target)
    for part in (np.real, np.imag):
        x = part(samples)
        mean = x.mean(axis=0)
        se = x.std(axis=0, ddof=1) / np.sqrt(n)
        err = np.abs(mean - part(target))
        # degenerate entries (zero spread) must match to roundoff
        ok = np.where(se > 1e-12, err <= nse * se, err <= 1e-10)
        assert ok.all(), f"max z = {np.max(err / np.maximum(se, 1e-300)):.2f}"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@contextmanager
def criterion(number, title):
    """Record one acceptance criterion; the block fills ``detail`` and asserts."""
    detail = {"text": ""}
    try:
        yield detail
    except BaseException:
        line = f"[{number:02d}] FAIL  {title}: {detail['text']}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        raise
    line = f"[{number:02d}] PASS  {title}: {detail['text']}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
