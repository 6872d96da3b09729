"""Single-particle and non-interacting two-particle dispersions.

Public functions return absolute energies (rad/s).  The ``*_offset``
variants return energies measured from E0 (one particle) or 2 E0 (two
particles); every solver works on those, since the GHz-scale physics sits
on a ~1e15 rad/s carrier that would otherwise eat most of the mantissa.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import C_LIGHT, ModelParams


def nu_grid(N: int) -> np.ndarray:
    """Integer indices nu in (-N/2, N/2], ascending."""
    return np.arange(-N // 2 + 1, N // 2 + 1)


def k_grid(N: int, a: float) -> np.ndarray:
    return 2.0 * np.pi * nu_grid(N) / (N * a)


def mu_grid(N: int) -> np.ndarray:
    """Half-integer indices mu in [-(N-1)/2, (N-1)/2], ascending."""
    return np.arange(N) - (N - 1) / 2.0


def kappa_grid(N: int, a: float) -> np.ndarray:
    return 2.0 * np.pi * mu_grid(N) / (N * a)


def split_pair(x, y, coupling_sq):
    """Eigenvalues (low, high) of [[x, c], [c, y]] with c**2 = coupling_sq.

    Written as min/max shifted by c^2/(r + |d|) so no large numbers cancel.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half = 0.5 * np.abs(x - y)
    r = np.sqrt(half * half + coupling_sq)
    denom = r + half
    shift = np.divide(coupling_sq, denom, out=np.zeros_like(denom), where=denom > 0)
    return np.minimum(x, y) - shift, np.maximum(x, y) + shift


# --- offset (carrier-free) evaluators -------------------------------------

def photon_offset(k, p: ModelParams):
    """E_p(k) - E0."""
    k = np.asarray(k, dtype=float)
    return p.delta + C_LIGHT * k * k / (np.sqrt(k * k + p.q_perp**2) + p.q_perp)


def exciton_offset(k, p: ModelParams):
    """E_e(k) - E0."""
    return 2.0 * p.t * np.cos(p.a * np.asarray(k, dtype=float))


def polariton_offsets(k, p: ModelParams):
    """(E_L - E0, E_U - E0)."""
    return split_pair(exciton_offset(k, p), photon_offset(k, p), p.G**2)


def delta_offset(eps, k, p: ModelParams):
    """Delta(E, k) with eps = E - 2 E0."""
    lo, hi = polariton_offsets(k, p)
    # (lo + hi) grouped as in two_polariton_curves, so Delta vanishes exactly on it
    return (eps - 2.0 * lo) * (eps - (lo + hi)) * (eps - 2.0 * hi)


def phi_offset(eps, k, p: ModelParams):
    """phi(E, k) with eps = E - 2 E0."""
    ep = photon_offset(k, p)
    ee = exciton_offset(k, p)
    return (eps - 2.0 * ep) * (eps - ep - ee) - 2.0 * p.G**2


# --- public absolute-energy API --------------------------------------------

def photon_energy(k, p: ModelParams):
    return p.E0 + photon_offset(k, p)


def exciton_energy(k, p: ModelParams):
    return p.E0 + exciton_offset(k, p)


def polariton_energies(k, p: ModelParams):
    """Lower and upper polariton energies E_L(k), E_U(k)."""
    lo, hi = polariton_offsets(k, p)
    return p.E0 + lo, p.E0 + hi


def delta_product(E, k, p: ModelParams):
    """[E - 2E_L][E - E_L - E_U][E - 2E_U]; zero on the free two-polariton curves."""
    return delta_offset(np.asarray(E, dtype=float) - 2.0 * p.E0, k, p)


def phi_aux(E, k, p: ModelParams):
    return phi_offset(np.asarray(E, dtype=float) - 2.0 * p.E0, k, p)


def strong_coupling_k(p: ModelParams) -> float:
    return 2.0 * np.sqrt(p.E0 * p.G) / C_LIGHT


def two_polariton_curves(k, p: ModelParams):
    """Offsets of the three free two-polariton branches (LL, LU, UU)."""
    lo, hi = polariton_offsets(k, p)
    return 2.0 * lo, lo + hi, 2.0 * hi


@dataclass(frozen=True)
class BandEdges:
    """Edges of the K=0 two-polariton bands on the k grid, offsets from 2 E0."""

    two_E0: float
    ll_bottom_offset: float
    ll_top_offset: float
    lu_bottom_offset: float
    lu_top_offset: float
    uu_bottom_offset: float
    uu_top_offset: float

    @property
    def ll_top(self) -> float:
        return self.two_E0 + self.ll_top_offset

    @property
    def lu_bottom(self) -> float:
        return self.two_E0 + self.lu_bottom_offset

    @property
    def uu_bottom(self) -> float:
        return self.two_E0 + self.uu_bottom_offset

    @property
    def gap(self) -> float:
        """Delta_LU = E_LU bottom - E_LL top."""
        return self.lu_bottom_offset - self.ll_top_offset


def band_edges(p: ModelParams) -> BandEdges:
    """Band edges over the k grid.

    For t = 0 these are E_LL(pi/a), E_LU(0), E_UU(0); for t != 0 the
    extrema need not sit at the zone centre/edge, so the grid is scanned.
    """
    ll, lu, uu = two_polariton_curves(k_grid(p.N, p.a), p)
    return BandEdges(
        two_E0=2.0 * p.E0,
        ll_bottom_offset=float(ll.min()),
        ll_top_offset=float(ll.max()),
        lu_bottom_offset=float(lu.min()),
        lu_top_offset=float(lu.max()),
        uu_bottom_offset=float(uu.min()),
        uu_top_offset=float(uu.max()),
    )


def dispersion_table(p: ModelParams, k=None) -> list[dict]:
    """Rows of k and the single/two-particle curves (absolute rad/s)."""
    if k is None:
        k = k_grid(p.N, p.a)
    k = np.asarray(k, dtype=float)
    ep, ee = photon_energy(k, p), exciton_energy(k, p)
    el, eu = polariton_energies(k, p)
    ll, lu, uu = two_polariton_curves(k, p)
    rows = []
    for i in range(k.size):
        rows.append({
            "k": float(k[i]),
            "E_p": float(ep[i]),
            "E_e": float(ee[i]),
            "E_L": float(el[i]),
            "E_U": float(eu[i]),
            "2E_L": float(2 * p.E0 + ll[i]),
            "E_L+E_U": float(2 * p.E0 + lu[i]),
            "2E_U": float(2 * p.E0 + uu[i]),
        })
    return rows
