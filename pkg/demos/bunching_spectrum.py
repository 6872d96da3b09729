"""Exact K=0 two-polariton spectrum and photon bunching at a = 5.3 um.

Run:  python demos/bunching_spectrum.py
"""
from dataclasses import replace

import numpy as np

from twopolariton import exact2p
from twopolariton.params import TWO_PI, PhysicalConfig, derive_params, retune_radius

# cavity tuned onto the atomic line
cfg = retune_radius(replace(PhysicalConfig(), a=5.3e-6), 0.0)
p = derive_params(cfg)
print(f"N = {p.N}, G/2pi = {p.G / TWO_PI / 1e9:.3f} GHz")

spec = exact2p.solve_spectrum(p)
counts = {b: len(spec.band(b)) for b in (exact2p.LL, exact2p.GAP, exact2p.LU, exact2p.UU)}
print("states per band:", counts)

# Delta A > 0 means two photons are more likely on the same site than uncorrelated
print(f"{'rho':>4} {'E-2E0 (GHz)':>12} {'Delta A':>9} {'residual':>9}")
for s in spec.band(exact2p.LL):
    print(f"{s.rho:4d} {s.offset / TWO_PI / 1e9:12.4f} {s.delta_A:9.4f} "
          f"{exact2p.state_residual(s, p):9.1e}")

best = max(spec.band(exact2p.LL), key=lambda s: s.delta_A)
print(f"strongest bunching: rho = {best.rho}, Delta A = {best.delta_A:.3f}")
print("largest |A(n)| at separation n =", int(np.argmax(np.abs(best.An))) - (p.N // 2 - 1))
