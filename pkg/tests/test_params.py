import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twopolariton.params import (
    J01, TWO_PI, C_LIGHT, ParameterError, PhysicalConfig, bessel_j0_first_zero,
    derive_params, retune_radius,
)

# [DERIVED] bisection on the J0 power series over [2, 3] (frozen)
J01_SERIES = 2.404825557695773
# [DERIVED] g = d sqrt(E0 / (2 eps0 hbar V)) by hand, G = g sqrt(40), d = 4.22 a.u.,
# R = 0.299 um, a = 5.32 um, f0 = 384 THz (frozen, Hz)
G_HAND_HZ = 5295052514.673679


def j0_series(x, terms=60):
    s, term = 0.0, 1.0
    for m in range(terms):
        if m:
            term *= -(x * x / 4.0) / (m * m)
        s += term
    return s


def test_j0_zero_matches_series_bisection():
    x = bessel_j0_first_zero()
    assert 2.0 < x < 3.0
    assert x == pytest.approx(J01_SERIES, rel=1e-15, abs=0)
    assert abs(j0_series(x)) < 1e-14


def test_j0_series_at_origin():
    assert j0_series(0.0) == 1.0


def test_j0_zero_deterministic():
    assert bessel_j0_first_zero() == bessel_j0_first_zero() == J01


def test_default_mode_is_near_resonant():
    # [PAPER] the lowest cavity mode is brought to resonance at R = 0.299 um
    p = derive_params(PhysicalConfig())
    mode_hz = C_LIGHT * p.q_perp / TWO_PI
    assert abs(mode_hz - 384e12) / 384e12 < 5e-3


def test_collective_coupling_hand_value():
    p = derive_params(PhysicalConfig())
    assert p.G / TWO_PI == pytest.approx(G_HAND_HZ, rel=1e-12)
    assert 1e9 < p.G / TWO_PI < 1e10


def test_zero_dipole_gives_zero_coupling():
    p = derive_params(PhysicalConfig(d=0.0))
    assert p.g == 0.0 and p.G == 0.0


def test_collective_coupling_independent_of_N():
    p1 = derive_params(PhysicalConfig(N=20))
    p2 = derive_params(PhysicalConfig(N=40))
    assert p2.G == pytest.approx(p1.G, rel=1e-14)


def test_model_invariants():
    p = derive_params(PhysicalConfig())
    assert p.G == p.g * math.sqrt(p.N)
    assert p.q_perp == J01 / 0.299e-6
    assert p.delta == C_LIGHT * p.q_perp - p.E0
    assert p.k_SC == 2.0 * math.sqrt(p.E0 * p.G) / C_LIGHT
    assert p.t == 0.0


def test_overrides():
    p = derive_params(PhysicalConfig(override_G=2e9, override_t=3e6))
    assert p.G == TWO_PI * 2e9
    assert p.g == p.G / math.sqrt(p.N)
    assert p.t == TWO_PI * 3e6


@pytest.mark.parametrize("bad", [
    dict(N=7), dict(N=2), dict(a=0.0), dict(R=-1e-6), dict(f0=0.0), dict(d=-1.0),
])
def test_rejects_inadmissible(bad):
    with pytest.raises(ParameterError):
        derive_params(replace(PhysicalConfig(), **bad))


def test_retune_to_resonance():
    cfg = retune_radius(PhysicalConfig(), 0.0)
    p = derive_params(cfg)
    assert p.delta == 0.0
    assert C_LIGHT * J01 / cfg.R == pytest.approx(p.E0, rel=1e-15)


@pytest.mark.parametrize("frac", [1.0, -0.5])
def test_retune_in_units_of_G(frac):
    G = derive_params(PhysicalConfig()).G
    p = derive_params(retune_radius(PhysicalConfig(), frac * G))
    assert p.delta / G == pytest.approx(frac, rel=1e-12)


def test_retune_rejects_negative_mode():
    with pytest.raises(ParameterError):
        retune_radius(PhysicalConfig(), -TWO_PI * 500e12)


@given(st.floats(-1.0, 1.0))
def test_retune_round_trip(frac):
    G = derive_params(PhysicalConfig()).G
    x = frac * G
    p = derive_params(retune_radius(PhysicalConfig(), x))
    assert abs(p.delta - x) <= 1e-12 * max(abs(x), G)


@given(
    st.sampled_from([4, 8, 40, 64]),
    st.floats(1e-7, 1e-4),
    st.floats(1e-7, 1e-5),
    st.floats(-1e10, 1e10),
)
def test_config_round_trip_bit_exact(N, a, R, delta_hz):
    cfg = PhysicalConfig(N=N, a=a, R=R, override_t=1e6, detuning_target=delta_hz)
    p = derive_params(cfg)
    again = derive_params(p.to_config())
    assert again == p
    # energies back to Hz and re-derived
    cfg2 = replace(cfg, override_G=p.G / TWO_PI)
    p2 = derive_params(cfg2)
    assert p2.G == pytest.approx(p.G, rel=1e-15)
    assert p2.t == p.t and p2.delta == p.delta


def test_with_coupling_keeps_invariants():
    p = derive_params(PhysicalConfig()).with_coupling(G=1e9, t=1e7, delta=0.0)
    assert p.G == pytest.approx(p.g * math.sqrt(p.N), rel=1e-15)
    assert p.config is None
    with pytest.raises(ParameterError):
        p.to_config()
