import numpy as np
import pytest

from wgmopo.dispersion import ResonatorGeometry
from wgmopo.material import load_material

# Device used throughout: R = 2.5 mm, rho = 0.58 mm (R/rho = 4.3), h = 0.5 mm.
DEVICE = ResonatorGeometry(2.5e-3, 0.58e-3, 0.5e-3)
C = 299_792_458.0

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def mat():
    return load_material()


@pytest.fixture(scope="session")
def geom():
    return DEVICE


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
