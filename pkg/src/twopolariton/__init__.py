"""Exact two-polariton states of an atom chain in a hollow-core fiber.

Two excitations shared between a lattice of two-level atoms (hard-core
excitons with nearest-neighbour hopping) and the fiber's guided photon
modes.  The K=0 problem is reduced to a scalar secular equation and solved
root by root; a brute-force diagonaliser in the full two-excitation space
serves as an independent check and covers K != 0.
"""
from .params import (
    ModelParams,
    ParameterError,
    PhysicalConfig,
    derive_params,
    retune_radius,
)
from .dispersion import band_edges, polariton_energies
from .exact2p import TwoPolaritonState, SpectrumK0, gap_states, solve_spectrum

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "ParameterError", "PhysicalConfig", "derive_params", "retune_radius",
    "band_edges", "polariton_energies",
    "TwoPolaritonState", "SpectrumK0", "gap_states", "solve_spectrum",
]
