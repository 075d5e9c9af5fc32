import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from roughrates.signatures import SampledPath
from roughrates.tensor_algebra import tensor_exp, tensor_mul

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_path(rng, d, segments, scale=1.0):
    """A path on [0, 1] with random interior breakpoints."""
    inner = np.sort(rng.uniform(0.02, 0.98, segments - 1))
    times = np.concatenate([[0.0], inner, [1.0]])
    pts = np.cumsum(np.vstack([np.zeros(d), scale * rng.normal(size=(segments, d))]), axis=0)
    return SampledPath(times, pts)


def random_group_element(rng, d, depth, segments=3, scale=0.7):
    g = tensor_exp(scale * rng.normal(size=d), depth)
    for _ in range(segments - 1):
        g = tensor_mul(g, tensor_exp(scale * rng.normal(size=d), depth))
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
