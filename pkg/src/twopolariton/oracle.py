"""Brute-force diagonalisation of the chain + fiber Hamiltonian, two excitations.

Basis (ordering fixed):
  photon pairs   |q1 <= q2>     N(N+1)/2 states
  photon+exciton |q; s>         N^2 states
  exciton pairs  |{s1 < s2}>    N(N-1)/2 states  (no double occupancy)

Diagonal energies are offset by 2 E0.  Total momentum is read off the
translation operator T (atoms s -> s+1, photon q picks up exp(-i q a)),
whose eigenvalue on a sector of total momentum K is exp(-i K a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import dispersion as disp
from .exact2p import bunching_merit, solve_spectrum
from .params import ModelParams

MAX_SITES = 64


@dataclass(frozen=True)
class TwoExcitationBasis:
    N: int
    photon_pairs: list  # (nu1, nu2) grid positions with i1 <= i2
    photon_exciton: list  # (i_q, s)
    exciton_pairs: list  # (s1, s2) with s1 < s2

    @classmethod
    def build(cls, N: int) -> "TwoExcitationBasis":
        pp = [(i, j) for i in range(N) for j in range(i, N)]
        pe = [(i, s) for i in range(N) for s in range(N)]
        ee = [(s1, s2) for s1 in range(N) for s2 in range(s1 + 1, N)]
        return cls(N, pp, pe, ee)

    @property
    def dim(self) -> int:
        return len(self.photon_pairs) + len(self.photon_exciton) + len(self.exciton_pairs)

    @property
    def offsets(self) -> tuple[int, int, int]:
        n_pp, n_pe = len(self.photon_pairs), len(self.photon_exciton)
        return 0, n_pp, n_pp + n_pe

    def pp_index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        N = self.N
        return i * N - i * (i - 1) // 2 + (j - i)

    def pe_index(self, i: int, s: int) -> int:
        return self.offsets[1] + i * self.N + s

    def ee_index(self, s1: int, s2: int) -> int:
        if s1 > s2:
            s1, s2 = s2, s1
        N = self.N
        return self.offsets[2] + s1 * N - s1 * (s1 + 1) // 2 + (s2 - s1 - 1)


def build_hamiltonian(p: ModelParams, basis: TwoExcitationBasis | None = None) -> np.ndarray:
    N = p.N
    if N > MAX_SITES:
        raise ValueError(f"N = {N} exceeds the dense budget of {MAX_SITES} sites")
    if basis is None:
        basis = TwoExcitationBasis.build(N)
    nu = disp.nu_grid(N)
    k = disp.k_grid(N, p.a)
    ep = disp.photon_offset(k, p)
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    g, t = p.g, p.t
    # e^{i q a s} for grid index i and site s
    phase = np.exp(2j * np.pi * np.outer(nu, np.arange(N)) / N)

    for (i, j) in basis.photon_pairs:
        r = basis.pp_index(i, j)
        H[r, r] = ep[i] + ep[j]
        norm = math.sqrt(2.0) if i == j else 1.0
        for s in range(N):
            # absorbing q_i leaves photon q_j and exciton at s, and vice versa
            if i == j:
                H[basis.pe_index(i, s), r] += g * phase[i, s] * 2.0 / norm
            else:
                H[basis.pe_index(j, s), r] += g * phase[i, s]
                H[basis.pe_index(i, s), r] += g * phase[j, s]
    for (i, s) in basis.photon_exciton:
        r = basis.pe_index(i, s)
        H[r, r] = ep[i]
        if t != 0.0:
            for s2 in ((s + 1) % N, (s - 1) % N):
                H[basis.pe_index(i, s2), r] += t
        for s2 in range(N):
            if s2 != s:
                H[basis.ee_index(s, s2), r] += g * phase[i, s2]
    if t != 0.0:
        for (s1, s2) in basis.exciton_pairs:
            r = basis.ee_index(s1, s2)
            for (moving, other) in ((s1, s2), (s2, s1)):
                for dest in ((moving + 1) % N, (moving - 1) % N):
                    if dest != other:
                        H[basis.ee_index(dest, other), r] += t
    # fill the upper triangle of the coupling blocks from the lower one
    lower = np.tril(H, -1)
    return np.diag(np.diag(H)) + lower + lower.conj().T


def translation_operator(p: ModelParams, basis: TwoExcitationBasis | None = None) -> np.ndarray:
    """Unitary T as a dense matrix (atoms shift by one site)."""
    N = p.N
    if basis is None:
        basis = TwoExcitationBasis.build(N)
    nu = disp.nu_grid(N)
    ph = np.exp(-2j * np.pi * nu / N)
    T = np.zeros((basis.dim, basis.dim), dtype=complex)
    for (i, j) in basis.photon_pairs:
        r = basis.pp_index(i, j)
        T[r, r] = ph[i] * ph[j]
    for (i, s) in basis.photon_exciton:
        T[basis.pe_index(i, (s + 1) % N), basis.pe_index(i, s)] = ph[i]
    for (s1, s2) in basis.exciton_pairs:
        T[basis.ee_index((s1 + 1) % N, (s2 + 1) % N), basis.ee_index(s1, s2)] = 1.0
    return T


@dataclass
class OracleResult:
    params: ModelParams
    basis: TwoExcitationBasis
    eigenvalues: np.ndarray  # offsets from 2E0, rad/s, ascending
    eigenvectors: np.ndarray  # columns
    K_index: np.ndarray  # integer nu_K in (-N/2, N/2]
    unresolved: list[int] = field(default_factory=list)
    hermiticity_residual: float = 0.0

    def sector(self, nu_K: int) -> np.ndarray:
        return np.flatnonzero(self.K_index == nu_K)

    def K(self, idx: int) -> float:
        return 2.0 * np.pi * self.K_index[idx] / (self.params.N * self.params.a)


def _clusters(w: np.ndarray, tol: float):
    start = 0
    for j in range(1, w.size + 1):
        if j == w.size or w[j] - w[j - 1] > tol:
            yield start, j
            start = j


def diagonalize(H: np.ndarray, p: ModelParams, basis: TwoExcitationBasis | None = None) -> OracleResult:
    """Dense eigensystem with total-momentum labels.

    Near-degenerate clusters are re-diagonalised together with T (Schur form of
    the restricted unitary is diagonal), then H is re-diagonalised inside each
    resulting momentum subspace.
    """
    N = p.N
    if basis is None:
        basis = TwoExcitationBasis.build(N)
    herm = float(np.max(np.abs(H - H.conj().T)))
    w, V = linalg.eigh(H)
    T = translation_operator(p, basis)
    TV = T @ V
    scale = max(float(np.max(np.abs(w))), p.G)
    tol = 1e-9 * scale
    K_idx = np.zeros(w.size, dtype=int)
    unresolved = []
    w_out = w.copy()
    V_out = V.copy()
    for a0, b0 in _clusters(w, tol):
        Vc = V[:, a0:b0]
        M = Vc.conj().T @ TV[:, a0:b0]
        if b0 - a0 == 1:
            lam = M[0, 0]
            K_idx[a0] = _phase_to_index(lam, N)
            if abs(lam) < 1 - 1e-8:
                unresolved.append(a0)
            continue
        S, Z = linalg.schur(M, output="complex")
        lam = np.diag(S)
        labels = np.array([_phase_to_index(x, N) for x in lam])
        W = Vc @ Z
        pos = a0
        for lab in np.unique(labels):
            cols = W[:, labels == lab]
            h = cols.conj().T @ H @ cols
            hw, hz = linalg.eigh(h)
            m = hw.size
            w_out[pos:pos + m] = hw
            V_out[:, pos:pos + m] = cols @ hz
            K_idx[pos:pos + m] = lab
            pos += m
        for j in range(a0, b0):
            lam_j = np.vdot(V_out[:, j], T @ V_out[:, j])
            if abs(lam_j) < 1 - 1e-8:
                unresolved.append(j)
    order = np.argsort(w_out, kind="stable")
    return OracleResult(p, basis, w_out[order], V_out[:, order], K_idx[order],
                        sorted(int(np.flatnonzero(order == u)[0]) for u in unresolved), herm)


def _phase_to_index(lam: complex, N: int) -> int:
    """nu_K from a T eigenvalue exp(-i 2 pi nu_K / N)."""
    nu = -np.angle(lam) * N / (2.0 * np.pi)
    nu = int(round(nu)) % N
    if nu > N // 2:
        nu -= N
    return nu


def solve(p: ModelParams) -> OracleResult:
    basis = TwoExcitationBasis.build(p.N)
    return diagonalize(build_hamiltonian(p, basis), p, basis)


# --- amplitude extraction ---------------------------------------------------

def photon_pair_function(result: OracleResult, idx: int) -> np.ndarray:
    """psi(q1, q2) = <0| b(q1) b(q2) |psi> on the full grid (symmetric)."""
    b = result.basis
    N = b.N
    v = result.eigenvectors[:, idx]
    psi = np.zeros((N, N), dtype=complex)
    for (i, j) in b.photon_pairs:
        c = v[b.pp_index(i, j)]
        if i == j:
            psi[i, i] = math.sqrt(2.0) * c
        else:
            psi[i, j] = psi[j, i] = c
    return psi


def relative_photon_amplitude(result: OracleResult, idx: int) -> np.ndarray:
    """Two-photon amplitude vs relative separation n in (-N/2, N/2].

    Phi(n, 0) = N^-1 sum_q psi(q, K - q) exp(i q a n); its modulus depends on
    n only, and at K = 0 it is proportional to the K=0 amplitude A(n).
    """
    N = result.basis.N
    nu = disp.nu_grid(N)
    nuK = int(result.K_index[idx])
    psi = photon_pair_function(result, idx)
    partner = [(int(np.flatnonzero(nu == _wrap(nuK - nq, N))[0])) for nq in nu]
    f = np.array([psi[i, partner[i]] for i in range(N)])
    phase = np.exp(2j * np.pi * np.outer(nu, nu) / N)  # [n, q]
    return phase @ f / N


def _wrap(nu: int, N: int) -> int:
    nu = nu % N
    return nu - N if nu > N // 2 else nu


def extract_amplitudes(result: OracleResult, idx: int):
    """(A(k), B(k), C(k)) of a K=0 eigenstate in the exact-solver convention.

    The overall phase is fixed so that A(k=0) is real and non-negative
    (or C(k=0) when A(k=0) vanishes).
    """
    if result.K_index[idx] != 0:
        raise ValueError("amplitude extraction in the (A, B, C) form needs K = 0")
    b = result.basis
    N = b.N
    nu = disp.nu_grid(N)
    v = result.eigenvectors[:, idx]
    neg = [int(np.flatnonzero(nu == _wrap(-x, N))[0]) for x in nu]
    A = np.zeros(N, dtype=complex)
    for i in range(N):
        A[i] = photon_pair_function(result, idx)[i, neg[i]] / math.sqrt(2.0)
    # photon q with exciton momentum -q
    sites = np.arange(N)
    B = np.zeros(N, dtype=complex)
    for i in range(N):
        comps = np.array([v[b.pe_index(i, s)] for s in sites])
        B[i] = np.sum(comps * np.exp(2j * np.pi * nu[i] * sites / N)) / math.sqrt(N)
    # exciton pairs: K=0 component per separation, spread over n = +-d
    Cn = np.zeros(N, dtype=complex)
    for d in range(1, N // 2 + 1):
        members = [b.ee_index(s, (s + d) % N) for s in range(N)]
        if d == N // 2:
            members = members[: N // 2]
        amp = np.sum(v[members]) / math.sqrt(len(members))
        n_pos = int(np.flatnonzero(nu == d)[0])
        if d == N // 2:
            Cn[n_pos] = amp
        else:
            n_neg = int(np.flatnonzero(nu == -d)[0])
            Cn[n_pos] = Cn[n_neg] = amp / math.sqrt(2.0)
    from .exact2p import to_momentum_space

    C = to_momentum_space(Cn)
    i0 = int(np.flatnonzero(nu == 0)[0])
    ref = A[i0] if abs(A[i0]) > 1e-12 else C[i0]
    if abs(ref) > 0:
        rot = np.conj(ref) / abs(ref)
        A, B, C = A * rot, B * rot, C * rot
    return A, B, C


def state_merit(result: OracleResult, idx: int) -> float:
    return bunching_merit(relative_photon_amplitude(result, idx))


# --- K != 0 bunching ----------------------------------------------------------

def ll_states_in_sector(result: OracleResult, nu_K: int, tol: float = 1e-9):
    """Indices of the sector's states below the top of its free LL band."""
    p = result.params
    N = p.N
    nu = disp.nu_grid(N)
    k = disp.k_grid(N, p.a)
    lo, _ = disp.polariton_offsets(k, p)
    partner = np.array([int(np.flatnonzero(nu == _wrap(nu_K - x, N))[0]) for x in nu])
    ll_top = float(np.max(lo + lo[partner]))
    idx = result.sector(nu_K)
    return idx[result.eigenvalues[idx] < ll_top - tol * p.G]


@dataclass
class MeritTrack:
    rho: int
    rows: list[dict]
    ambiguities: list[str]


def merit_vs_K(p: ModelParams, rho: int, result: OracleResult | None = None) -> MeritTrack:
    """Delta A over all total momenta K for the rho-th LL state of each sector.

    States are matched across K by their energy rank inside the LL band.
    """
    if p.N > 40:
        raise ValueError("merit_vs_K is budgeted for N <= 40")
    if result is None:
        result = solve(p)
    N = p.N
    rows, notes = [], []
    n_ll0 = ll_states_in_sector(result, 0).size
    for nu_K in disp.nu_grid(N):
        ll = ll_states_in_sector(result, int(nu_K))
        if ll.size != n_ll0:
            notes.append(f"K index {nu_K}: {ll.size} LL states vs {n_ll0} at K=0")
        if rho > ll.size:
            notes.append(f"K index {nu_K}: rho={rho} beyond LL band")
            continue
        j = int(ll[rho - 1])
        rows.append({
            "nu_K": int(nu_K),
            "K": 2.0 * np.pi * nu_K / (N * p.a),
            "E_hz": (2.0 * p.E0 + float(result.eigenvalues[j])) / (2 * np.pi),
            "E_minus_2E0_ghz": float(result.eigenvalues[j]) / (2e9 * np.pi),
            "deltaA": state_merit(result, j),
        })
    return MeritTrack(rho, rows, notes)


def _amplitude_diff(spec, result: OracleResult) -> float:
    """Largest |(A,B,C)_exact - (A,B,C)_oracle| over the symmetric states.

    Each exact state is paired with the K=0 oracle state nearest in energy;
    both sides carry the A(k=0) >= 0 phase convention, so only a residual
    sign (from a vanishing A(k=0)) is aligned here.
    """
    idx0 = result.sector(0)
    w0 = result.eigenvalues[idx0]
    worst = 0.0
    for st in spec.states:
        j = int(idx0[np.argmin(np.abs(w0 - st.offset))])
        A, B, C = extract_amplitudes(result, j)
        v = np.concatenate((A, B, C))
        u = st.vector()
        ph = np.vdot(v, u)
        if abs(ph) > 0:
            v = v * (ph / abs(ph))
        worst = max(worst, float(np.max(np.abs(u - v))))
    return worst


def compare_k0(p: ModelParams, result: OracleResult | None = None) -> dict:
    """Diff report of the oracle K=0 sector against the exact solver."""
    if result is None:
        result = solve(p)
    spec = solve_spectrum(p)
    exact = spec.all_offsets()
    oracle = np.sort(result.eigenvalues[result.sector(0)])
    out = {
        "n_exact": int(exact.size),
        "n_oracle": int(oracle.size),
        "unresolved_K": len(result.unresolved),
    }
    if exact.size == oracle.size:
        scale = np.maximum(np.maximum(np.abs(exact), np.abs(oracle)), p.G)
        rel = np.abs(exact - oracle) / scale
        out["max_rel_diff"] = float(rel.max())
        out["max_amplitude_diff"] = _amplitude_diff(spec, result)
        out["states"] = [
            {"exact_offset_hz": float(e / (2 * np.pi)), "oracle_offset_hz": float(o / (2 * np.pi)),
             "rel_diff": float(r)}
            for e, o, r in zip(exact, oracle, rel)
        ]
    return out
