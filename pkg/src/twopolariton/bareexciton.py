"""Two bare excitons with hard-core (kinematic) interaction, no photons.

Closed form: the excluded contact amplitude shifts the relative wave
vectors from the integer grid k_nu onto the half-integer grid kappa_mu.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from .dispersion import k_grid, kappa_grid, mu_grid, nu_grid


def bare_amplitude(n, mu, N: int):
    """Normalised relative-coordinate amplitude g_n(mu).

    Uses |kappa_mu| so that g is even in mu, which is what makes
    sum_n g_n(mu1) g_n(mu2) = delta_{|mu1|,|mu2|} hold.
    """
    n = np.asarray(n)
    theta = 2.0 * np.pi * np.abs(np.asarray(mu, dtype=float)) / N
    return math.sqrt(2.0 / N) * (n != 0) * np.sin(np.abs(n) * theta)


def basis_matrix(N: int) -> np.ndarray:
    """g_n(mu) as an array indexed [n, mu] on the (-N/2, N/2] x mu grids."""
    return bare_amplitude(nu_grid(N)[:, None], mu_grid(N)[None, :], N)


def bare_energy(mu, E0: float, t: float, N: int):
    """2 E0 + 4 t cos(a kappa_mu)."""
    return 2.0 * E0 + 4.0 * t * np.cos(2.0 * np.pi * np.asarray(mu, dtype=float) / N)


def bare_amplitude_momentum(nu, mu, N: int):
    """Fourier transform of g_n(mu) on the k grid,

        C_mu(k_nu) = N^-1/2 sum_n g_n(mu) exp(-i k_nu a n)
                   = (sqrt(2)/N) sin(a|kappa_mu|) / (cos(a k_nu) - cos(a kappa_mu)).

    The denominator never vanishes because the two grids interlace.
    """
    phi = 2.0 * np.pi * np.asarray(nu, dtype=float) / N
    theta = 2.0 * np.pi * np.abs(np.asarray(mu, dtype=float)) / N
    return math.sqrt(2.0) / N * np.sin(theta) / (np.cos(phi) - np.cos(theta))


def pair_basis(N: int):
    return [(s1, s2) for s1 in range(N) for s2 in range(s1 + 1, N)]


def pair_hamiltonian(N: int, E0: float, t: float) -> np.ndarray:
    """Hard-core two-exciton Hamiltonian on unordered site pairs, periodic."""
    pairs = pair_basis(N)
    index = {pr: i for i, pr in enumerate(pairs)}
    H = np.zeros((len(pairs), len(pairs)))
    for i, (s1, s2) in enumerate(pairs):
        H[i, i] = 2.0 * E0
        for moving, other in ((s1, s2), (s2, s1)):
            for dest in ((moving + 1) % N, (moving - 1) % N):
                if dest == other:
                    continue
                H[index[tuple(sorted((dest, other)))], i] += t
    return H


def k0_projector_basis(N: int) -> np.ndarray:
    """Orthonormal zero-momentum states, one per pair separation 1..N/2."""
    pairs = pair_basis(N)
    index = {pr: i for i, pr in enumerate(pairs)}
    cols = []
    for d in range(1, N // 2 + 1):
        members = {tuple(sorted((s, (s + d) % N))) for s in range(N)}
        v = np.zeros(len(pairs))
        for pr in members:
            v[index[pr]] = 1.0
        cols.append(v / np.linalg.norm(v))
    return np.array(cols).T


def bare_oracle(N: int, E0: float, t: float, offset: bool = True) -> dict:
    """Direct diagonalisation of the two-exciton problem.

    Returns the full spectrum, the K=0 sector spectrum and the Hermiticity
    residual of the built matrix.  Energies are relative to 2 E0 unless
    ``offset`` is False.
    """
    if N % 2 or N > 64:
        raise ValueError("N must be even and at most 64")
    base = 0.0 if offset else E0
    H = pair_hamiltonian(N, base, t)
    Q = k0_projector_basis(N)
    return {
        "dim": H.shape[0],
        "hermiticity_residual": float(np.max(np.abs(H - H.T))),
        "spectrum": linalg.eigvalsh(H),
        "k0_spectrum": linalg.eigvalsh(Q.T @ H @ Q),
    }


def bare_table(N: int, a: float, E0: float, t: float, with_amplitudes: bool = False) -> list[dict]:
    mu = mu_grid(N)
    kap = kappa_grid(N, a)
    E = bare_energy(mu, E0, t, N)
    g = basis_matrix(N)
    nu = nu_grid(N)
    rows = []
    for j in range(N):
        row = {"mu": float(mu[j]), "kappa": float(kap[j]), "E": float(E[j])}
        if with_amplitudes:
            for i, n in enumerate(nu):
                row[f"g_{int(n)}"] = float(g[i, j])
        rows.append(row)
    return rows


__all__ = [
    "bare_amplitude", "bare_energy", "bare_amplitude_momentum", "bare_oracle",
    "basis_matrix", "bare_table", "k_grid", "kappa_grid",
]
