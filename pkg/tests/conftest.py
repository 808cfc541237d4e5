import math

import numpy as np
import pytest

from optoamp import kernels
from optoamp.lab import BathParams
from optoamp.params import REFERENCE_POWER, derive_drive_state, reference_mirror, reference_optics

BACKENDS = ["numpy"] + (["numba"] if kernels.numba_backend is not None else [])
KERNEL_NAMES = ("response", "quantum_noise", "lorentzian", "lorentzian_normal_equations")


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    mod = kernels.numba_backend if request.param == "numba" else kernels.numpy_backend
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture(scope="session")
def optics():
    return reference_optics()


@pytest.fixture(scope="session")
def mirror():
    return reference_mirror()


@pytest.fixture(scope="session")
def bath():
    return BathParams(300.0)


@pytest.fixture(scope="session")
def drive(optics):
    # red-detuned probe at the reference operating point
    return derive_drive_state(optics, REFERENCE_POWER, -2.97)


@pytest.fixture(scope="session")
def wide_grid(mirror):
    # +-2 kHz around the resonance at 0.1 Gamma steps
    g = mirror.gamma_m
    return mirror.omega_m + np.arange(-2 * math.pi * 2e3, 2 * math.pi * 2e3, 0.1 * g)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
