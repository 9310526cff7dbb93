import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_tuple(rng, n, d, norm):
    """Random complex n-tuple of d x d matrices with row norm exactly ``norm``."""
    X = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    row = np.hstack(list(X))
    return X * (norm / np.linalg.norm(row, 2))


def random_ball_point(rng, n, max_norm):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z) * max_norm * rng.uniform(0.05, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
