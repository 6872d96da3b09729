"""Wave-packet picture of the two-polariton states.

The photon-photon + photon-exciton subsystem (AB) is diagonal per k_nu and
carries integer quantum numbers; the hard-core exciton-exciton subsystem is
diagonal in the half-integer kappa_mu basis.  Their coupling, the kernel
Lambda_{nu mu}, mixes the two grids and builds the bunching amplitude A(0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dispersion as disp
from .bareexciton import basis_matrix, bare_energy
from .exact2p import TwoPolaritonState
from .params import ModelParams

NEAR_POLE = 1e-9  # in units of G


def ab_energies(k, p: ModelParams):
    """AB-subsystem energies (L, U) as offsets from 2 E0.

    One photon at k plus one polariton built with coupling sqrt(2) G.
    """
    ep = disp.photon_offset(k, p)
    ee = disp.exciton_offset(k, p)
    return disp.split_pair(2.0 * ep, ep + ee, 2.0 * p.G**2)


def mixing(k, p: ModelParams):
    """Photon-pair and photon-exciton weights of the two AB eigenvectors.

    Returns ((X_alpha_L, X_beta_L), (X_alpha_U, X_beta_U)).  X_beta >= 0
    and X_alpha carries the sign that makes (X_alpha, X_beta) an
    eigenvector of [[2E_p, sqrt2 G], [sqrt2 G, E_p + E_e]].
    """
    ep = disp.photon_offset(k, p)
    ee = disp.exciton_offset(k, p)
    out = []
    for lam in ab_energies(k, p):
        x = lam - ep - ee
        norm = np.sqrt(2.0 * p.G**2 + x * x)
        with np.errstate(invalid="ignore", divide="ignore"):
            xa = np.where(norm > 0, x / norm, 0.0)
            xb = np.where(norm > 0, math.sqrt(2.0) * p.G / norm, 0.0)
        # G = 0: the AB block is already diagonal
        if p.G == 0:
            xa = np.where(np.abs(lam - 2.0 * ep) <= np.abs(lam - ep - ee), 1.0, 0.0)
            xb = 1.0 - xa
        out.append((xa, xb))
    return tuple(out)


def lambda_kernel(nu, mu, N: int):
    """Lambda = (1/2)[cot(pi(nu+|mu|)/N) - cot(pi(nu-|mu|)/N)]."""
    nu = np.asarray(nu, dtype=float)
    m = np.abs(np.asarray(mu, dtype=float))
    return 0.5 * (1.0 / np.tan(np.pi * (nu + m) / N) - 1.0 / np.tan(np.pi * (nu - m) / N))


def lambda_matrix(N: int) -> np.ndarray:
    return lambda_kernel(disp.nu_grid(N)[:, None], disp.mu_grid(N)[None, :], N)


def reduced_kernel(nu, nu2, N: int):
    """F = N (delta_{nu,nu'} + delta_{nu,-nu'}) - 2/N, indices mod N."""
    nu = np.asarray(nu)
    nu2 = np.asarray(nu2)
    same = (nu - nu2) % N == 0
    opposite = (nu + nu2) % N == 0
    return N * (same.astype(float) + opposite.astype(float)) - 2.0 / N


@dataclass
class WavepacketDecomposition:
    """A K=0 state in the (p_nu^(i), e_mu) coordinates.

    ``p`` has shape (2, N) for the L and U branches on the k grid, ``e`` has
    one entry per mu (so +mu and -mu repeat the same value).
    """

    p: np.ndarray
    e: np.ndarray
    E_ab: np.ndarray  # (2, N) offsets
    X_alpha: np.ndarray  # (2, N)
    X_beta: np.ndarray  # (2, N)


def decompose(state: TwoPolaritonState, p: ModelParams) -> WavepacketDecomposition:
    k = disp.k_grid(p.N, p.a)
    (xaL, xbL), (xaU, xbU) = mixing(k, p)
    Xa = np.array([xaL, xaU])
    Xb = np.array([xbL, xbU])
    pc = Xa * state.Ak[None, :] + Xb * state.Bk[None, :]
    e = 0.5 * basis_matrix(p.N).T @ state.Cn
    return WavepacketDecomposition(pc, e, np.array(ab_energies(k, p)), Xa, Xb)


def recompose(dec: WavepacketDecomposition, N: int):
    """Back to (A(k), B(k), C(n))."""
    A = np.sum(dec.p * dec.X_alpha, axis=0)
    B = np.sum(dec.p * dec.X_beta, axis=0)
    Cn = basis_matrix(N) @ dec.e
    return A, B, Cn


def coupling_term(dec: WavepacketDecomposition, p: ModelParams) -> np.ndarray:
    """Right-hand side of the p-equation: (2G/N) X_beta sum_mu Lambda e_mu."""
    lam_e = lambda_matrix(p.N) @ dec.e
    return 2.0 * p.G / p.N * dec.X_beta * lam_e[None, :]


def _relative(lhs, rhs, state: TwoPolaritonState, p: ModelParams) -> float:
    """Backward-error style residual: |lhs - rhs| / (max(|E - 2E0|, G, |t|) |psi|).

    Same scale as ``exact2p.coupled_residual``; unlike a ratio to |lhs| it
    stays meaningful when E sits next to an AB level and lhs is tiny.
    """
    scale = max(abs(state.offset), p.G, abs(p.t)) * float(np.linalg.norm(state.vector()))
    return float(np.linalg.norm(np.ravel(lhs - rhs)) / scale)


def p_equation_residual(state: TwoPolaritonState, p: ModelParams) -> float:
    """Relative residual of (E - E_ab) p = (2G/N) X_beta Lambda e."""
    dec = decompose(state, p)
    lhs = (state.offset - dec.E_ab) * dec.p
    return _relative(lhs, coupling_term(dec, p), state, p)


def e_equation_residual(state: TwoPolaritonState, p: ModelParams) -> float:
    """Relative residual of (E - E_mu) e_mu = (G/N) sum_{i,nu} X_beta Lambda p."""
    dec = decompose(state, p)
    mu = disp.mu_grid(p.N)
    e_ex = bare_energy(mu, 0.0, p.t, p.N)
    lhs = (state.offset - e_ex) * dec.e
    rhs = p.G / p.N * (lambda_matrix(p.N).T @ np.sum(dec.X_beta * dec.p, axis=0))
    return _relative(lhs, rhs, state, p)


def lambda_gram(N: int) -> np.ndarray:
    """(2/N) Lambda Lambda^T with mu summed over the full half-integer grid.

    Closed form N (delta_{nu,nu'} + delta_{nu,-nu'}) - 2; this is the
    kernel that survives when e_mu is eliminated at t = 0.  It differs from
    ``reduced_kernel`` only in the constant term.
    """
    L = lambda_matrix(N)
    return 2.0 / N * (L @ L.T)


def reduced_rhs(dec: WavepacketDecomposition, offset: float, p: ModelParams,
                literal: bool = False) -> np.ndarray:
    """G^2 X_beta / (N (E - 2E0)) sum_{i',nu'} K X_beta p with K = F + 2/N - 2.

    ``literal=True`` evaluates the commonly quoted form
    G^2 X_beta / (2N (E - 2E0)) sum F X_beta p instead, which does not
    follow from the p and e equations (kept for comparison only).
    """
    nu = disp.nu_grid(p.N)
    F = reduced_kernel(nu[:, None], nu[None, :], p.N)
    K, scale = (F, 0.5) if literal else (F + 2.0 / p.N - 2.0, 1.0)
    s = K @ np.sum(dec.X_beta * dec.p, axis=0)
    return scale * p.G**2 * dec.X_beta * s[None, :] / (p.N * offset)


def reduced_equation_residual(state: TwoPolaritonState, p: ModelParams,
                              literal: bool = False) -> float:
    """Relative residual of the t = 0 equation with e eliminated,

        (E - E_ab) p = G^2 X_beta / (N (E - 2E0)) sum K X_beta p,

    with K = F + 2/N - 2 (see ``lambda_gram``).
    """
    if p.t != 0:
        raise ValueError("the reduced equation assumes t = 0")
    dec = decompose(state, p)
    lhs = (state.offset - dec.E_ab) * dec.p
    return _relative(lhs, reduced_rhs(dec, state.offset, p, literal), state, p)


def reconstruct_A0(state: TwoPolaritonState, p: ModelParams) -> float:
    """A(n=0) rebuilt from the exciton-exciton amplitudes alone,

        A(0) = 2G / N^{3/2} sum_{i,nu} X_alpha X_beta / (E - E_ab) sum_mu Lambda e_mu,
        e_mu = (1/2) sum_s g_s(mu) C(s).
    """
    if p.G == 0:
        return 0.0
    dec = decompose(state, p)
    denom = state.offset - dec.E_ab
    if np.min(np.abs(denom)) < NEAR_POLE * p.G:
        raise ArithmeticError("state energy coincides with an AB level; A(0) ill-conditioned")
    lam_e = lambda_matrix(p.N) @ dec.e
    terms = dec.X_alpha * dec.X_beta / denom * lam_e[None, :]
    return 2.0 * p.G / p.N**1.5 * math.fsum(terms.ravel())


def approx_A0(state: TwoPolaritonState, p: ModelParams, rho: int | None = None) -> float:
    """A(0) with C(s) replaced by X_gamma g_s(mu0), mu0 = rho - 1/2.

    X_gamma is the exciton-pair weight sqrt(sum |C|^2), signed by the overlap
    of C with g(mu0).
    """
    if rho is None:
        rho = state.rho
    if not 1 <= rho <= p.N // 2:
        raise ValueError(f"rho must lie in [1, {p.N // 2}], got {rho}")
    mu0 = rho - 0.5
    g0 = basis_matrix(p.N)[:, int(np.flatnonzero(disp.mu_grid(p.N) == mu0)[0])]
    weight = math.sqrt(float(np.sum(state.Ck**2)))
    sign = 1.0 if float(g0 @ state.Cn) >= 0 else -1.0
    return approx_A0_from_weight(sign * weight, state.offset, rho, p)


def approx_A0_from_weight(x_gamma: float, offset: float, rho: int, p: ModelParams) -> float:
    if x_gamma == 0.0 or p.G == 0:
        return 0.0
    k = disp.k_grid(p.N, p.a)
    nu = disp.nu_grid(p.N)
    (xaL, xbL), (xaU, xbU) = mixing(k, p)
    eL, eU = ab_energies(k, p)
    lam = lambda_kernel(nu, rho - 0.5, p.N) + lambda_kernel(nu, -(rho - 0.5), p.N)
    s = np.sum(xaL * xbL / (offset - eL) * lam) + np.sum(xaU * xbU / (offset - eU) * lam)
    return p.G * x_gamma / p.N**1.5 * float(s)


def direct_A0(state: TwoPolaritonState, p: ModelParams) -> float:
    return float(state.An[p.N // 2 - 1])


def wavepacket_report(state: TwoPolaritonState, p: ModelParams) -> dict:
    k = disp.k_grid(p.N, p.a)
    dec = decompose(state, p)
    report = {
        "rho": state.rho,
        "classification": state.classification,
        "E_minus_2E0_hz": state.offset / (2 * math.pi),
        "k": k.tolist(),
        "E_ab_L_hz": (dec.E_ab[0] / (2 * math.pi)).tolist(),
        "E_ab_U_hz": (dec.E_ab[1] / (2 * math.pi)).tolist(),
        "X_alpha_L": dec.X_alpha[0].tolist(),
        "X_beta_L": dec.X_beta[0].tolist(),
        "X_alpha_U": dec.X_alpha[1].tolist(),
        "X_beta_U": dec.X_beta[1].tolist(),
        "lambda_row_sums": lambda_matrix(p.N).sum(axis=1).tolist(),
        "e_mu": dec.e.tolist(),
        "A0_direct": direct_A0(state, p),
    }
    try:
        report["A0_reconstructed"] = reconstruct_A0(state, p)
    except ArithmeticError as exc:
        report["A0_reconstructed"] = None
        report["A0_reconstructed_error"] = str(exc)
    if 1 <= state.rho <= p.N // 2:
        report["A0_approx"] = approx_A0(state, p)
    return report
