"""Physical inputs and the derived model parameters.

Internal unit system: hbar = 1, every energy is an angular frequency in
rad/s, lengths are in meters.  Frequencies in user-facing inputs are
ordinary frequencies (Hz).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from scipy.special import jn_zeros

C_LIGHT = 2.99792458e8  # m/s
EPS0 = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s
AU_DIPOLE = 8.4783536255e-30  # C m per atomic unit of dipole moment

TWO_PI = 2.0 * math.pi


class ParameterError(ValueError):
    """Raised for physically inadmissible inputs."""


def bessel_j0_first_zero() -> float:
    """First positive zero of J0, fixing the lowest transverse fiber mode."""
    return float(jn_zeros(0, 1)[0])


J01 = bessel_j0_first_zero()


@dataclass(frozen=True)
class PhysicalConfig:
    """Experimental inputs for an atom chain inside a hollow-core fiber.

    Parameters
    ----------
    N : int
        Number of lattice sites (even, at least 4).
    a : float
        Lattice constant in m.
    R : float
        Fiber radius in m.
    f0 : float
        Atomic transition frequency in Hz.
    d : float
        Transition dipole moment in atomic units.
    override_G, override_t : float, optional
        Collective coupling and exciton hopping in Hz.  ``override_G``
        replaces the coupling derived from ``d``.
    detuning_target : float, optional
        Cavity detuning in Hz.  When set it is taken as exact and ``R`` is
        understood to be the matching radius (see :func:`retune_radius`).
    """

    N: int = 40
    a: float = 5.32e-6
    R: float = 0.299e-6
    f0: float = 384e12
    d: float = 4.22
    override_G: Optional[float] = None
    override_t: Optional[float] = None
    detuning_target: Optional[float] = None

    def validate(self) -> None:
        if int(self.N) != self.N or self.N % 2 != 0:
            raise ParameterError(f"N must be an even integer, got {self.N}")
        if self.N < 4:
            raise ParameterError(f"N must be at least 4, got {self.N}")
        for name in ("a", "R", "f0"):
            value = getattr(self, name)
            if not value > 0:
                raise ParameterError(f"{name} must be positive, got {value}")
        if self.d < 0:
            raise ParameterError(f"dipole d must be non-negative, got {self.d}")
        if self.override_G is not None and self.override_G < 0:
            raise ParameterError("override_G must be non-negative")


@dataclass(frozen=True)
class ModelParams:
    """Hamiltonian parameters, energies in rad/s."""

    N: int
    a: float
    E0: float
    q_perp: float
    V: float
    g: float
    G: float
    t: float
    delta: float
    k_SC: float
    config: Optional[PhysicalConfig] = None

    def to_config(self) -> PhysicalConfig:
        """Return the inputs this parameter set was derived from."""
        if self.config is None:
            raise ParameterError("parameters were not derived from a PhysicalConfig")
        return self.config

    def with_coupling(self, G: float | None = None, t: float | None = None,
                      delta: float | None = None) -> "ModelParams":
        """Copy with G, t and/or delta replaced (all in rad/s).

        Useful for numerical studies where the physical chain from fiber
        radius to coupling is irrelevant.  The result keeps no config.
        """
        G = self.G if G is None else float(G)
        t = self.t if t is None else float(t)
        delta = self.delta if delta is None else float(delta)
        return replace(
            self,
            G=G,
            g=G / math.sqrt(self.N),
            t=t,
            delta=delta,
            q_perp=(self.E0 + delta) / C_LIGHT,
            k_SC=strong_coupling_wavevector(self.E0, G),
            config=None,
        )


def strong_coupling_wavevector(E0: float, G: float) -> float:
    return 2.0 * math.sqrt(E0 * G) / C_LIGHT


def coupling_from_dipole(d_au: float, E0: float, V: float) -> float:
    """Single-atom coupling g in rad/s (SI form of d*sqrt(2 pi E0 / V))."""
    d_si = d_au * AU_DIPOLE
    return d_si * math.sqrt(E0 / (2.0 * EPS0 * HBAR * V))


def dipolar_hopping(d_au: float, a: float) -> float:
    """Nearest-neighbour dipolar hopping scale d^2/(4 pi eps0 hbar a^3), rad/s.

    Only a magnitude estimate; the model takes t as a free input.
    """
    d_si = d_au * AU_DIPOLE
    return d_si**2 / (4.0 * math.pi * EPS0 * HBAR * a**3)


def derive_params(cfg: PhysicalConfig) -> ModelParams:
    cfg.validate()
    N = int(cfg.N)
    E0 = TWO_PI * cfg.f0
    V = math.pi * cfg.R**2 * N * cfg.a
    if cfg.detuning_target is not None:
        delta = TWO_PI * cfg.detuning_target
        q_perp = (E0 + delta) / C_LIGHT
    else:
        q_perp = J01 / cfg.R
        delta = C_LIGHT * q_perp - E0
    if cfg.override_G is not None:
        G = TWO_PI * cfg.override_G
        g = G / math.sqrt(N)
    else:
        g = coupling_from_dipole(cfg.d, E0, V)
        G = g * math.sqrt(N)
    t = TWO_PI * cfg.override_t if cfg.override_t is not None else 0.0
    return ModelParams(
        N=N,
        a=cfg.a,
        E0=E0,
        q_perp=q_perp,
        V=V,
        g=g,
        G=G,
        t=t,
        delta=delta,
        k_SC=strong_coupling_wavevector(E0, G),
        config=cfg,
    )


def retune_radius(cfg: PhysicalConfig, delta_target: float) -> PhysicalConfig:
    """Fiber radius that puts the k=0 cavity mode at E0 + delta_target.

    ``delta_target`` is in rad/s.  The returned config records the target
    detuning so the derived ``delta`` reproduces it to rounding.
    """
    E0 = TWO_PI * cfg.f0
    mode = E0 + delta_target
    if not mode > 0:
        raise ParameterError(
            f"target cavity frequency E0 + delta = {mode} rad/s is not positive"
        )
    return replace(cfg, R=C_LIGHT * J01 / mode, detuning_target=delta_target / TWO_PI)
