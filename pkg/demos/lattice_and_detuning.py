"""How the bunching window moves with lattice constant and detuning.

Run:  python demos/lattice_and_detuning.py
"""
from dataclasses import replace

from twopolariton import exact2p, sweeps
from twopolariton.params import PhysicalConfig, retune_radius

base = retune_radius(PhysicalConfig(), 0.0)

# larger lattice constants give stronger bunching
spec = sweeps.SweepSpec("lattice_constant", (0.532e-6, 2.66e-6, 5.32e-6), base)
res = sweeps.merit_sweep(spec, jobs=3)
windows = sweeps.band_windows(res, "a_m", exact2p.LL, fraction=0.1)
for a in spec.values:
    top = max(r["deltaA"] for r in res.rows if r["a_m"] == a)
    print(f"a = {a * 1e6:5.3f} um: max Delta A = {top:.3f}, window(>0.1 max) = {windows[a]:.2f} GHz")

# red detuning widens the range of bunched states
base53 = replace(PhysicalConfig(), a=5.3e-6)
fracs = (-0.5, 0.0, 1.0)
vals = tuple(sweeps.delta_values_in_units_of_G(base53, fracs))
res = sweeps.merit_sweep(sweeps.SweepSpec("detuning", vals, base53))
windows = sweeps.band_windows(res, "delta_hz", exact2p.LL)
for f, v in zip(fracs, vals):
    print(f"delta = {f:+.1f} G: Delta A > 0 over {windows[v]:.2f} GHz")
