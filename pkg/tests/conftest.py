import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rotgas.fields import PhysicalParams, VortexData
from rotgas.functionals import derive

settings.register_profile(
    "rotgas", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("rotgas")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


EXAMPLE1 = dict(b=-4.0, C=0.25, Pi_bar=1.0, gamma=2.0, l=1.0)


@pytest.fixture(scope="session")
def example1_pos():
    return VortexData(epsilon=10.0, **EXAMPLE1)


@pytest.fixture(scope="session")
def example1_neg():
    return VortexData(epsilon=-10.0, **EXAMPLE1)


def pressureless(b, eps, l=1.0):
    return VortexData(b, eps, mode="pressureless", l=l)


def make_fs(params, entropy_ok=True, **raw):
    """FunctionalSet from hand-picked raw integrals (defaults: zero perturbation)."""
    base = {
        "m0": 0.0, "Ek0": 0.0, "pressure_excess0": 0.0,
        "G0": math.pi * params.rho_bar * params.R**4 / 4.0,
        "F10": 0.0, "F20": 0.0, "P0_1": 0.0, "P0_2": 0.0, "I0_1": 0.0, "I0_2": 0.0,
    }
    base.update(raw)
    return derive(base, params, entropy_ok)


def unit_params(gamma=2.0, l=1.0, rho_bar=1.0, p_bar=0.0, R=1.0):
    C = 0.0 if p_bar == 0.0 else p_bar / rho_bar**gamma
    return PhysicalParams(gamma, l, rho_bar, p_bar, R, C)


def fourth_order_second_derivative(f, t, h):
    return (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t) + 16 * f(t - h) - f(t - 2 * h)) / (12 * h * h)


def rng(seed=0):
    return np.random.default_rng(seed)


def blob_grid(amp, centre, width, velocity, gamma=1.4, l=1.0, rho_bar=1.0, C=1.0, n=64):
    """Isentropic (or pressureless when C = 0) bump of density and velocity inside B_1."""
    from rotgas.fields import GriddedData

    R = 1.0
    p_bar = C * rho_bar**gamma
    params = PhysicalParams(gamma, l, rho_bar, p_bar, R, C)
    half = 1.0
    c = -half + (np.arange(n) + 0.5) * (2 * half / n)
    X1, X2 = np.meshgrid(c, c, indexing="xy")
    s2 = ((X1 - centre[0]) ** 2 + (X2 - centre[1]) ** 2) / width**2
    bump = np.where(s2 < 1.0, (1.0 - np.minimum(s2, 1.0)) ** 3, 0.0)
    rho = rho_bar * (1.0 + amp * bump)
    p = C * rho**gamma
    return GriddedData(n, half, velocity[0] * bump, velocity[1] * bump, rho, p, params)
