import numpy as np
import pytest
from hypothesis import settings

from modelsparse import kernels
from modelsparse.glm import Dataset, Linear, Logistic, Poisson

# exhaustive oracles inside properties are slow but bounded
settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    monkeypatch.setattr(kernels, "_impl", kernels.get_backend(request.param))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ALL_FAMILIES = [Linear(1.0), Linear(0.7), Logistic(), Poisson()]


def random_dataset(family, n, p, rng, scale=None):
    """Small random dataset with responses valid for ``family``."""
    x = rng.standard_normal((n, p))
    if scale is not None:
        x *= scale
    if isinstance(family, Logistic):
        y = rng.integers(0, 2, n).astype(float)
    elif isinstance(family, Poisson):
        y = rng.poisson(1.0, n).astype(float)
    else:
        y = rng.standard_normal(n)
    return Dataset(x, y)


def near_orthogonal_design(n, p, rng, noise=0.02):
    """``sqrt(n) * (Q + noise * G)`` with ``Q`` having orthonormal columns, so
    the Gram matrix ``X^T X / n`` is close to the identity."""
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return np.sqrt(n) * (q + noise * rng.standard_normal((n, p)) / np.sqrt(n))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[1][1:].rstrip(":"))):
            terminalreporter.write_line(line)
