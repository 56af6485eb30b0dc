import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rel_l2(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def sphere(D, radius, center=None):
    c = D // 2 if center is None else center
    z, y, x = np.mgrid[:D, :D, :D]
    return (((x - c) ** 2 + (y - c) ** 2 + (z - c) ** 2) <= radius**2).astype(np.float64)


def gaussian_blob(D, sigma, center=None):
    c = np.full(3, D // 2, dtype=float) if center is None else np.asarray(center, dtype=float)
    z, y, x = np.mgrid[:D, :D, :D].astype(float)
    r2 = (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2
    return np.exp(-r2 / (2 * sigma**2))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
