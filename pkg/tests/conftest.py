import numpy as np
import pytest

from quasinodal import DualTransform, EnergyModel, IdentityTransform, Nonlinearity, Potential, build_grid


def make_model(N=3, R=30.0, n=6000, l=1.0, pot=None, semilinear=False):
    nl = Nonlinearity.semilinear() if semilinear else Nonlinearity.builtin(l)
    tr = IdentityTransform() if semilinear else DualTransform()
    return EnergyModel(tr, nl, pot or Potential.constant(1.0), build_grid(N, R, n))


@pytest.fixture(scope="session")
def small_model():
    """Coarse grid for unit tests that need a full solve."""
    return make_model(R=20.0, n=2000)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_field(grid, rng, width=None):
    """Random smooth radial bump vanishing at R."""
    r = grid.nodes
    R = grid.R
    a, b, c = rng.uniform(0.5, 2.0, 3)
    width = width or R / 4
    return a * np.exp(-((r / width) ** 2) * b) * (1 - (r / R) ** 2) + 0.1 * c * np.sin(np.pi * r / R)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
