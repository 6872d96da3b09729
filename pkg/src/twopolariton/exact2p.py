"""Exact K=0 two-polariton eigenstates with hard-core excitons.

The hard-core constraint C(n=0) = 0 turns the problem into a compression of
the free two-particle Hamiltonian, so the eigenvalues are the roots of the
secular function

    F(E) = sum_k phi(E, k) / Delta(E, k),

which has simple poles with positive residues at the free two-polariton
energies.  Exactly one root sits strictly between any two consecutive
distinct poles and none outside, so plain bisection on each inter-pole
bracket finds every symmetric eigenstate.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import dispersion as disp
from .params import ModelParams

log = logging.getLogger(__name__)

BISECT_MAX_ITER = 200
BISECT_RTOL = 1e-13
POLE_GUARD = 1e-6  # in units of G
EDGE_TOL = 1e-9  # in units of G

LL, LU, UU, GAP, BELOW = "LL-band", "LU-band", "UU-band", "gap", "below-band"
_BAND_OF = {0: LL, 1: LU, 2: UU}


class PoleProximityError(ArithmeticError):
    """The secular function was requested too close to one of its poles."""


def neumaier_sum(terms: np.ndarray, axis: int = -1) -> np.ndarray:
    """Compensated (Kahan-Babuska-Neumaier) summation along ``axis``."""
    terms = np.moveaxis(np.asarray(terms, dtype=float), axis, -1)
    total = np.zeros(terms.shape[:-1])
    comp = np.zeros(terms.shape[:-1])
    for j in range(terms.shape[-1]):
        x = terms[..., j]
        s = total + x
        big = np.abs(total) >= np.abs(x)
        comp += np.where(big, (total - s) + x, (x - s) + total)
        total = s
    return total + comp


def secular_offset(eps, p: ModelParams) -> np.ndarray:
    """F at eps = E - 2E0 (vectorised, no pole guard)."""
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    k = disp.k_grid(p.N, p.a)
    e = eps[:, None]
    terms = disp.phi_offset(e, k[None, :], p) / disp.delta_offset(e, k[None, :], p)
    return neumaier_sum(terms, axis=1)


def pole_offsets(p: ModelParams):
    """Distinct free two-polariton energies (offsets) and their band labels.

    Poles from +k and -k coincide exactly and are stored once.
    """
    k = disp.k_grid(p.N, p.a)
    curves = disp.two_polariton_curves(k, p)
    energies = np.concatenate(curves)
    bands = np.repeat(np.arange(3), k.size)
    order = np.lexsort((bands, energies))
    energies, bands = energies[order], bands[order]
    keep = np.concatenate(([True], np.diff(energies) > 0))
    return energies[keep], bands[keep]


def secular_value(E: float, p: ModelParams) -> float:
    """F(E) for an absolute energy E (rad/s).

    Raises PoleProximityError within 1e-6 G of a pole; the caller must pick
    another point.
    """
    eps = float(E) - 2.0 * p.E0
    poles, _ = pole_offsets(p)
    if np.min(np.abs(poles - eps)) < POLE_GUARD * p.G:
        raise PoleProximityError(f"E - 2E0 = {eps:g} rad/s is within {POLE_GUARD} G of a pole")
    return float(secular_offset(eps, p)[0])


def _shifted_terms(origin, x, p: ModelParams):
    """phi / Delta on the k grid at eps = origin + x, with origin a pole.

    Every factor (eps - pole) is formed as (origin - pole) + x, so the factor
    belonging to the origin pole is exactly x.  Roots lying within a few ulp
    of a pole are then resolved to full relative precision in x.
    """
    origin = np.atleast_1d(np.asarray(origin, dtype=float))[:, None]
    x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
    k = disp.k_grid(p.N, p.a)[None, :]
    lo, hi = disp.polariton_offsets(k, p)
    ep = disp.photon_offset(k, p)
    ee = disp.exciton_offset(k, p)
    d = ((origin - 2.0 * lo) + x) * ((origin - (lo + hi)) + x) * ((origin - 2.0 * hi) + x)
    ph = ((origin - 2.0 * ep) + x) * ((origin - ep - ee) + x) - 2.0 * p.G**2
    return ph, d


def _secular_shifted(origin, x, p: ModelParams) -> np.ndarray:
    ph, d = _shifted_terms(origin, x, p)
    return neumaier_sum(ph / d, axis=1)


def _bisect_brackets(lo: np.ndarray, hi: np.ndarray, p: ModelParams):
    """Vectorised bisection for F on open inter-pole brackets.

    F -> +inf at the left pole and -inf at the right one, so the sign at the
    midpoint alone decides which half keeps the root.  The sign at the
    bracket centre picks the nearer pole as origin; bisection then runs on
    the distance x to that pole and stops once the width is below
    BISECT_RTOL * |x|.

    Returns (origin, x) with the root at origin + x.
    """
    centre = 0.5 * (lo + hi)
    upper = secular_offset(centre, p) > 0
    origin = np.where(upper, hi, lo)
    # x runs over (x_lo, x_hi) with the root strictly inside
    x_lo = np.where(upper, centre - hi, 0.0)
    x_hi = np.where(upper, 0.0, centre - lo)
    active = np.ones(lo.size, dtype=bool)
    for _ in range(BISECT_MAX_ITER):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        mid = 0.5 * (x_lo[idx] + x_hi[idx])
        stuck = (mid <= x_lo[idx]) | (mid >= x_hi[idx])
        f = _secular_shifted(origin[idx], mid, p)
        right = f > 0
        x_lo[idx[right & ~stuck]] = mid[right & ~stuck]
        x_hi[idx[~right & ~stuck]] = mid[~right & ~stuck]
        width = x_hi[idx] - x_lo[idx]
        scale = np.maximum(np.abs(x_lo[idx]), np.abs(x_hi[idx]))
        done = stuck | (width <= BISECT_RTOL * scale)
        active[idx[done]] = False
    return origin, 0.5 * (x_lo + x_hi), x_lo, x_hi


# --- amplitudes -----------------------------------------------------------

def amplitudes_offset(eps: float, p: ModelParams, origin: float = 0.0):
    """Normalised (A(k), B(k), C(k)) on the k grid for a root of F.

    The root sits at E - 2E0 = origin + eps; passing the nearest pole as
    ``origin`` keeps the small factor (E - pole) exact.
    """
    k = disp.k_grid(p.N, p.a)
    G = p.G
    ph, d = _shifted_terms(origin, eps, p)
    ph, d = ph[0], d[0]
    two_ep = 2.0 * disp.photon_offset(k, p)
    a_num = np.full_like(k, 2.0 * G * G)
    b_num = math.sqrt(2.0) * G * ((origin - two_ep) + eps)
    c_num = ph
    # normalise in scaled form: divide numerators by the largest |Delta|^-1 term
    A, B, C = a_num / d, b_num / d, c_num / d
    norm = math.sqrt(math.fsum(np.concatenate((A * A, B * B, C * C))))
    if norm == 0.0:
        return np.zeros_like(k), np.zeros_like(k), np.zeros_like(k)
    A, B, C = A / norm, B / norm, C / norm
    # fix the overall sign: A(k=0) >= 0 (C(k=0) >= 0 when A vanishes)
    i0 = int(np.flatnonzero(disp.nu_grid(p.N) == 0)[0])
    ref = A[i0] if abs(A[i0]) > 0 else C[i0]
    if ref < 0:
        A, B, C = -A, -B, -C
    return A, B, C


def amplitudes(E_rho: float, p: ModelParams, residual_tol: float = 1e-6):
    """Amplitudes for an absolute root energy; rejects energies that are not roots.

    The check is on the hard-core sum, sum_k C(k), relative to max |C|.
    """
    eps = float(E_rho) - 2.0 * p.E0
    A, B, C = amplitudes_offset(eps, p)
    if abs(math.fsum(C)) > residual_tol * np.max(np.abs(C)):
        raise ValueError("energy is not a root of the secular function")
    return A, B, C


def coupled_residual(eps: float, A, B, C, p: ModelParams, origin: float = 0.0) -> float:
    """Relative residual of the three coupled K=0 equations.

    With eps = E - 2E0 and the scattering term
    S = -(sqrt2 G / N) sum B - (4t / N) sum C cos(aq):

        eps A = 2 E_p A + sqrt2 G B
        eps B = (E_p + E_e) B + sqrt2 G (A + C)
        eps C = 2 E_e C + sqrt2 G B + S

    (single-particle energies relative to E0), evaluated at
    E - 2E0 = origin + eps.  Normalised by max(|E - 2E0|, G, |t|) times the
    amplitude norm.
    """
    k = disp.k_grid(p.N, p.a)
    ep = disp.photon_offset(k, p)
    ee = disp.exciton_offset(k, p)
    A, B, C = (np.asarray(x) for x in (A, B, C))
    s2g = math.sqrt(2.0) * p.G
    S = -s2g / p.N * math.fsum(B) - 4.0 * p.t / p.N * math.fsum(C * np.cos(p.a * k))
    r = np.concatenate((
        ((origin - 2.0 * ep) + eps) * A - s2g * B,
        ((origin - ep - ee) + eps) * B - s2g * (A + C),
        ((origin - 2.0 * ee) + eps) * C - s2g * B - S,
    ))
    scale = max(abs(origin + eps), p.G, abs(p.t)) * math.sqrt(float(np.sum(A * A + B * B + C * C)))
    return float(np.linalg.norm(r) / scale) if scale > 0 else float(np.linalg.norm(r))


def state_residual(st: "TwoPolaritonState", p: ModelParams) -> float:
    return coupled_residual(st.shift, st.Ak, st.Bk, st.Ck, p, origin=st.origin)


def to_real_space(Xk) -> np.ndarray:
    """X(n) = N^{-1/2} sum_nu X(k_nu) exp(i k_nu a n), n in (-N/2, N/2]."""
    Xk = np.asarray(Xk)
    N = Xk.shape[-1]
    nu = disp.nu_grid(N)
    phase = np.exp(2j * np.pi * np.outer(nu, nu) / N)  # [n, nu]
    return Xk @ phase.T / math.sqrt(N)


def to_momentum_space(Xn) -> np.ndarray:
    Xn = np.asarray(Xn)
    N = Xn.shape[-1]
    nu = disp.nu_grid(N)
    phase = np.exp(-2j * np.pi * np.outer(nu, nu) / N)  # [nu, n]
    return Xn @ phase.T / math.sqrt(N)


def k_eff(rho: int, N: int, a: float) -> float:
    """Effective wave vector of the rho-th LL state, interpolating k_nu -> kappa_mu."""
    if not 1 <= rho <= N // 2:
        raise ValueError(f"rho must lie in [1, {N // 2}], got {rho}")
    rho_star = (rho - 1) * (N / 2 - 0.5) / (N / 2 - 1)
    return 2.0 * math.pi * rho_star / (N * a)


def bunching_merit(An) -> float:
    """Relative excess of |A(n=0)| over the mean |A(n)|, clipped at zero.

    ``An`` is ordered on n in (-N/2, N/2], so n = 0 sits at index N/2 - 1.
    """
    a = np.abs(np.asarray(An))
    N = a.size
    mean = a.sum() / N
    if mean == 0.0:
        return 0.0
    return max(0.0, float((a[N // 2 - 1] - mean) / mean))


# --- spectrum -------------------------------------------------------------

@dataclass
class TwoPolaritonState:
    """One K=0 symmetric eigenstate.

    ``offset`` is E - 2E0 in rad/s; ``E`` is the absolute energy.  The
    root is also kept as ``origin + shift`` with ``origin`` the nearest free
    two-polariton energy, which resolves roots closer to a pole than the
    rounding of ``offset``.  ``rho`` counts states within their band from 1.
    """

    rho: int
    E: float
    offset: float
    Ak: np.ndarray
    Bk: np.ndarray
    Ck: np.ndarray
    An: np.ndarray
    Bn: np.ndarray
    Cn: np.ndarray
    classification: str
    k_eff: float | None = None
    index: int = 0
    origin: float = 0.0
    shift: float = 0.0

    @property
    def delta_A(self) -> float:
        return bunching_merit(self.An)

    def vector(self) -> np.ndarray:
        return np.concatenate((self.Ak, self.Bk, self.Ck))


@dataclass
class SpectrumK0:
    params: ModelParams
    states: list[TwoPolaritonState]
    antisym_levels: np.ndarray  # offsets E_p(k) + E_e(k) - 2E0, 0 < nu < N/2
    edges: disp.BandEdges
    diagnostics: list[str] = field(default_factory=list)

    def band(self, name: str) -> list[TwoPolaritonState]:
        return [s for s in self.states if s.classification == name]

    def offsets(self) -> np.ndarray:
        return np.array([s.offset for s in self.states])

    def all_offsets(self) -> np.ndarray:
        """Symmetric roots and antisymmetric levels, sorted (oracle K=0 sector)."""
        return np.sort(np.concatenate((self.offsets(), self.antisym_levels)))


def _make_state(eps: float, p: ModelParams, classification: str,
                origin: float = 0.0) -> TwoPolaritonState:
    A, B, C = amplitudes_offset(eps, p, origin)
    offset = float(origin + eps)
    return TwoPolaritonState(
        rho=0,
        E=float(2.0 * p.E0 + offset),
        offset=offset,
        origin=float(origin),
        shift=float(eps),
        Ak=A, Bk=B, Ck=C,
        An=to_real_space(A).real,
        Bn=to_real_space(B).real,
        Cn=to_real_space(C).real,
        classification=classification,
    )


def is_bound_gap_state(eps: float, An, Bn, Cn, p: ModelParams,
                       edges: disp.BandEdges | None = None) -> bool:
    """Whether a root below the LU band is a split-off bound bipolariton.

    The interval between the LL top and the LU bottom always holds exactly
    one root.  While the bound state is merged with the LU continuum that
    root is just the lowest LU scattering state, pulled below the edge by
    less than one level spacing (and by an amount shrinking like 1/N).  It
    counts as a gap state once it lies deeper than the first LU level
    spacing and its wave function is localised: |A(n)|, |B(n)| largest at
    n = 0 and |C(n)| largest at |n| = 1.
    """
    if edges is None:
        edges = disp.band_edges(p)
    tol = EDGE_TOL * p.G
    if not (edges.ll_top_offset + tol < eps < edges.lu_bottom_offset - tol):
        return False
    if edges.lu_bottom_offset - eps <= lu_edge_spacing(p):
        return False
    N = p.N
    n0 = N // 2 - 1
    a, b, c = np.abs(An), np.abs(Bn), np.abs(Cn)
    return bool(
        np.argmax(a) == n0
        and np.argmax(b) == n0
        and np.max(c[[n0 - 1, n0 + 1]]) >= np.max(c)
    )


def lu_edge_spacing(p: ModelParams) -> float:
    """Gap between the two lowest distinct LU poles (finite-size level spacing)."""
    lu = np.unique(disp.two_polariton_curves(disp.k_grid(p.N, p.a), p)[1])
    return float(lu[1] - lu[0])


def solve_spectrum(p: ModelParams) -> SpectrumK0:
    """All K=0 symmetric eigenstates plus the decoupled antisymmetric levels."""
    if not p.G > 0:
        raise ValueError("solve_spectrum needs G > 0")
    poles, bands = pole_offsets(p)
    lo0, hi0 = poles[:-1].copy(), poles[1:].copy()
    origin, shift, x_lo, x_hi = _bisect_brackets(lo0, hi0, p)
    diagnostics = []

    # a genuine root shows F > 0 just left and F < 0 just right of it; an
    # endpoint still sitting on its pole means the root is within rounding of
    # that pole, which is fine (F is +inf / -inf there by construction)
    at_lo = (x_lo == 0.0) & (origin == lo0)
    at_hi = (x_hi == 0.0) & (origin == hi0)
    with np.errstate(divide="ignore", invalid="ignore"):
        f_lo = np.where(at_lo, np.inf, _secular_shifted(origin, x_lo, p))
        f_hi = np.where(at_hi, -np.inf, _secular_shifted(origin, x_hi, p))
    for j in np.flatnonzero(~((f_lo >= 0) & (f_hi <= 0))):
        diagnostics.append(
            f"no sign change in bracket ({lo0[j]:.17g}, {hi0[j]:.17g}) rad/s; "
            "possible root-pole collision"
        )
    for msg in diagnostics:
        log.warning(msg)

    edges = disp.band_edges(p)
    states = []
    for j in range(origin.size):
        upper, lower = int(bands[j + 1]), int(bands[j])
        cls = _BAND_OF[upper]
        st = _make_state(float(shift[j]), p, cls, float(origin[j]))
        eps = st.offset
        if upper == 1 and lower == 0:
            # root in the interval between the LL top and the LU bottom
            if is_bound_gap_state(st.offset, st.An, st.Bn, st.Cn, p, edges):
                st.classification = GAP
        if eps < edges.ll_bottom_offset:
            st.classification = BELOW
        states.append(st)

    counters: dict[str, int] = {}
    for i, st in enumerate(states):
        counters[st.classification] = counters.get(st.classification, 0) + 1
        st.rho = counters[st.classification]
        st.index = i + 1
        if st.classification == LL and st.rho <= p.N // 2:
            st.k_eff = k_eff(st.rho, p.N, p.a)

    nu = np.arange(1, p.N // 2)
    k_pos = 2.0 * np.pi * nu / (p.N * p.a)
    antisym = disp.photon_offset(k_pos, p) + disp.exciton_offset(k_pos, p)
    return SpectrumK0(p, states, np.sort(antisym), edges, diagnostics)


def gap_states(p: ModelParams, spectrum: SpectrumK0 | None = None) -> list[TwoPolaritonState]:
    """Bound bipolaritons inside the LL/LU gap (empty list if none)."""
    if spectrum is None:
        spectrum = solve_spectrum(p)
    if spectrum.edges.gap <= 0:
        return []
    return spectrum.band(GAP)


def scaled_merit(state: TwoPolaritonState, p: ModelParams) -> float:
    """Delta A divided by the two-photon weight X^(L,alpha)(k_eff)."""
    from .wavepacket import mixing

    if state.k_eff is None:
        raise ValueError("scaled merit is defined for LL-band states only")
    x_alpha = abs(float(mixing(state.k_eff, p)[0][0]))
    return scale_merit(state.delta_A, x_alpha)


def scale_merit(delta_a: float, x_alpha: float) -> float:
    if abs(x_alpha) < 1e-12:
        return math.inf if delta_a > 0 else 0.0
    return delta_a / abs(x_alpha)


def spectrum_table(spec: SpectrumK0) -> list[dict]:
    from .wavepacket import mixing

    p = spec.params
    rows = []
    for st in spec.states:
        dA = st.delta_A
        scaled = None
        if st.k_eff is not None:
            scaled = scale_merit(dA, float(mixing(st.k_eff, p)[0][0]))
        rows.append({
            "rho": st.rho,
            "E_hz": st.E / (2 * math.pi),
            "E_minus_2E0_ghz": st.offset / (2e9 * math.pi),
            "k_eff": st.k_eff,
            "classification": st.classification,
            "deltaA": dA,
            "deltaA_scaled": scaled,
        })
    return rows


def state_table(st: TwoPolaritonState, p: ModelParams) -> list[dict]:
    nu = disp.nu_grid(p.N)
    k = disp.k_grid(p.N, p.a)
    return [
        {
            "n": int(nu[i]),
            "A_n": float(st.An[i]), "B_n": float(st.Bn[i]), "C_n": float(st.Cn[i]),
            "k": float(k[i]),
            "A_k": float(st.Ak[i]), "B_k": float(st.Bk[i]), "C_k": float(st.Ck[i]),
        }
        for i in range(p.N)
    ]
