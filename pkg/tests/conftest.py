"""Shared fixtures: the Rb D2 chain at the lattice constants used throughout."""
from dataclasses import replace
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from twopolariton import exact2p
from twopolariton.params import PhysicalConfig, derive_params, retune_radius

settings.register_profile(
    "repo", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

A_532NM = 0.532e-6
A_266 = 2.66e-6
A_532 = 5.32e-6
A_503 = 50.3e-6


def resonant_config(a=A_532, N=40, t_hz=None, delta_hz=0.0):
    """Chain at lattice constant ``a`` with the cavity retuned to detuning ``delta_hz``."""
    cfg = retune_radius(replace(PhysicalConfig(), a=a, N=N, override_t=t_hz), 2 * 3.141592653589793 * delta_hz)
    return cfg


@lru_cache(maxsize=None)
def resonant_params(a=A_532, N=40, t_hz=None, delta_hz=0.0):
    return derive_params(resonant_config(a, N, t_hz, delta_hz))


@lru_cache(maxsize=None)
def resonant_spectrum(a=A_532, N=40, t_hz=None, delta_hz=0.0):
    return exact2p.solve_spectrum(resonant_params(a, N, t_hz, delta_hz))


@pytest.fixture(scope="session")
def p532():
    return resonant_params()


@pytest.fixture(scope="session")
def spec532():
    return resonant_spectrum()


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
