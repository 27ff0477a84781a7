import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dense_function(A, f):
    """f(A) through a LAPACK eigendecomposition (test oracle)."""
    lam, Q = np.linalg.eigh(A)
    return (Q * f(lam)) @ Q.T


def random_symmetric(rng, n):
    M = rng.standard_normal((n, n))
    return 0.5 * (M + M.T)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
