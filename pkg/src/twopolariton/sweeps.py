"""Parameter sweeps over lattice constant and detuning, and the gap-state scan.

Each sweep point is an independent job; results are merged in input order,
so the output does not depend on the number of workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import exact2p
from .bareexciton import bare_energy
from .dispersion import band_edges, mu_grid
from .params import TWO_PI, ParameterError, PhysicalConfig, derive_params, retune_radius

AXES = ("lattice_constant", "detuning", "both")


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    ``values`` are lattice constants in m, detunings in Hz, or (a, delta)
    pairs for ``axis="both"``.  They must be strictly increasing
    (lexicographically for pairs).
    """

    axis: str
    values: tuple
    base: PhysicalConfig = field(default_factory=PhysicalConfig)
    outputs: tuple = ("deltaA",)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(
            tuple(float(x) for x in v) if self.axis == "both" else float(v) for v in self.values
        ))

    def validate(self) -> None:
        if self.axis not in AXES:
            raise ParameterError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ParameterError("sweep has no values")
        if self.axis == "both" and any(len(v) != 2 for v in self.values):
            raise ParameterError("axis 'both' takes (a, delta) pairs")
        for lo, hi in zip(self.values, self.values[1:]):
            if not lo < hi:
                raise ParameterError(f"sweep values must be strictly increasing: {lo} !< {hi}")
        for v in self.values:
            point_config(self, v).validate()

    def key_columns(self, v) -> dict:
        if self.axis == "lattice_constant":
            return {"a_m": v}
        if self.axis == "detuning":
            return {"delta_hz": v}
        return {"a_m": v[0], "delta_hz": v[1]}


def point_config(spec: SweepSpec, v) -> PhysicalConfig:
    cfg = spec.base
    if spec.axis == "lattice_constant":
        return replace(cfg, a=v)
    if spec.axis == "detuning":
        return retune_radius(cfg, TWO_PI * v)
    return retune_radius(replace(cfg, a=v[0]), TWO_PI * v[1])


@dataclass
class SweepResult:
    rows: list[dict]
    diagnostics: dict  # str(value) -> list of messages

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])


def _merit_point(cfg: PhysicalConfig):
    p = derive_params(cfg)
    if p.G == 0:
        # no light-matter mixing: the LL band is the bare exciton-pair band
        mu = mu_grid(p.N)
        levels = bare_energy(mu[mu > 0], 0.0, p.t, p.N)
        rows = [
            {"rho": i + 1, "classification": exact2p.LL,
             "E_hz": float(2 * p.E0 + e) / TWO_PI, "E_minus_2E0_ghz": float(e) / (TWO_PI * 1e9),
             "deltaA": 0.0}
            for i, e in enumerate(np.sort(levels))
        ]
        return rows, ["G = 0: uncoupled exciton pairs, no photon amplitude"]
    spec = exact2p.solve_spectrum(p)
    rows = [
        {"rho": st.rho, "classification": st.classification,
         "E_hz": st.E / TWO_PI, "E_minus_2E0_ghz": st.offset / (TWO_PI * 1e9),
         "deltaA": st.delta_A}
        for st in spec.states
    ]
    return rows, list(spec.diagnostics)


def _guarded(fn, arg):
    try:
        return fn(arg)
    except (ParameterError, ArithmeticError, ValueError) as exc:
        return [], [f"failed: {type(exc).__name__}: {exc}"]


def _merit_job(cfg):
    return _guarded(_merit_point, cfg)


def _map(fn, args: Sequence, jobs: int):
    if jobs <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as pool:
        return list(pool.map(fn, args))


def merit_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Solve the K=0 spectrum at each sweep point and tabulate Delta A per state.

    Solver diagnostics (and failures) are collected per point; a failing
    point contributes no rows but does not stop the sweep.
    """
    spec.validate()
    cfgs = [point_config(spec, v) for v in spec.values]
    results = _map(_merit_job, cfgs, jobs)
    rows, diags = [], {}
    for v, (point_rows, notes) in zip(spec.values, results):
        key = spec.key_columns(v)
        rows.extend({**key, **r} for r in point_rows)
        if notes:
            diags[str(v)] = notes
    return SweepResult(rows, diags)


def band_windows(result: SweepResult, key: str, band: str = exact2p.LL,
                 fraction: float = 0.0) -> dict:
    """Energy span (GHz) of states with Delta A > fraction * max, per sweep value.

    The span runs from the lowest to the highest qualifying state inside
    ``band``; zero when fewer than two qualify.
    """
    out = {}
    for v in dict.fromkeys(r[key] for r in result.rows):
        sel = [r for r in result.rows if r[key] == v and r["classification"] == band]
        if not sel:
            out[v] = 0.0
            continue
        top = max(r["deltaA"] for r in sel)
        E = [r["E_minus_2E0_ghz"] for r in sel if r["deltaA"] > fraction * top and r["deltaA"] > 0]
        out[v] = (max(E) - min(E)) if len(E) > 1 else 0.0
    return out


# --- gap states ------------------------------------------------------------

@dataclass
class GapScan:
    rows: list[dict]
    onset_a: float | None
    penetration_monotonic: bool | None
    gap_merit_monotonic: bool | None


def _gap_point(cfg: PhysicalConfig) -> dict:
    p = derive_params(cfg)
    edges = band_edges(p)
    spec = exact2p.solve_spectrum(p)
    gaps = spec.band(exact2p.GAP)
    ll = spec.band(exact2p.LL)
    row = {
        "a_m": cfg.a,
        "gap_ghz": edges.gap / (TWO_PI * 1e9),
        "ll_top_ghz": edges.ll_top_offset / (TWO_PI * 1e9),
        "lu_bottom_ghz": edges.lu_bottom_offset / (TWO_PI * 1e9),
        "n_gap_states": len(gaps),
        "gap_state_ghz": None,
        "penetration_ghz": None,
        "gap_deltaA": None,
        "continuum_max_deltaA": float(max((s.delta_A for s in ll), default=0.0)),
    }
    if gaps:
        g = min(gaps, key=lambda s: s.offset)
        row["gap_state_ghz"] = g.offset / (TWO_PI * 1e9)
        row["penetration_ghz"] = (edges.lu_bottom_offset - g.offset) / (TWO_PI * 1e9)
        row["gap_deltaA"] = g.delta_A
    return row


def _non_decreasing(x) -> bool | None:
    if len(x) < 2:
        return None
    return bool(np.all(np.diff(x) >= 0))


def gap_scan(a_min: float, a_max: float, steps: int, base: PhysicalConfig | None = None,
             jobs: int = 1) -> GapScan:
    """Scan the lattice constant on a uniform grid and track the gap state.

    Monotonicity of the penetration depth and of the gap-state merit over
    the detected range is measured and reported, not assumed.
    """
    if not a_min < a_max:
        raise ParameterError(f"a_min must be below a_max ({a_min} !< {a_max})")
    if steps < 2:
        raise ParameterError("steps must be at least 2")
    base = base if base is not None else PhysicalConfig()
    cfgs = [replace(base, a=float(a)) for a in np.linspace(a_min, a_max, steps)]
    for c in cfgs:
        c.validate()
    rows = _map(_gap_point, cfgs, jobs)
    found = [r for r in rows if r["gap_state_ghz"] is not None]
    return GapScan(
        rows=rows,
        onset_a=found[0]["a_m"] if found else None,
        penetration_monotonic=_non_decreasing([r["penetration_ghz"] for r in found]),
        gap_merit_monotonic=_non_decreasing([r["gap_deltaA"] for r in found]),
    )


def delta_values_in_units_of_G(base: PhysicalConfig, fractions) -> list[float]:
    """Detunings in Hz for multiples of the collective coupling G."""
    G = derive_params(base).G
    return [f * G / TWO_PI for f in fractions]


__all__ = [
    "SweepSpec", "SweepResult", "GapScan", "merit_sweep", "gap_scan",
    "band_windows", "point_config", "delta_values_in_units_of_G",
]
