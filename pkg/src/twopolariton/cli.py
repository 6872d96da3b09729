"""Command-line entry point: ``twopolariton <subcommand> [options]``.

Every subcommand reads one run configuration (JSON file, then flag
overrides), computes a table or report and writes it once, as CSV or JSON,
to stdout or ``--out``.  Nothing is stochastic, so identical input gives
byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import dispersion as disp
from . import exact2p, oracle, sweeps, wavepacket
from .bareexciton import bare_energy, basis_matrix
from .params import TWO_PI, ParameterError, PhysicalConfig, derive_params, retune_radius

FORMATS = ("csv", "json")

# config key -> (PhysicalConfig field, type)
_PHYSICAL_KEYS = {
    "n_sites": ("N", int),
    "lattice_constant_m": ("a", float),
    "fiber_radius_m": ("R", float),
    "transition_freq_hz": ("f0", float),
    "dipole_au": ("d", float),
    "coupling_G_hz": ("override_G", float),
    "hopping_t_hz": ("override_t", float),
}
_KEYS = set(_PHYSICAL_KEYS) | {"detuning_hz", "output"}
_OUTPUT_KEYS = {"format", "path"}


class ConfigError(ParameterError):
    pass


@dataclass(frozen=True)
class RunConfig:
    physical: PhysicalConfig
    output_format: str = "csv"
    output_path: str | None = None


def _coerce(key: str, value, typ):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key '{key}' must be a number, got {value!r}")
    if typ is int:
        if float(value) != int(value):
            raise ConfigError(f"config key '{key}' must be an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"config key '{key}' must be finite, got {value!r}")
    return float(value)


def config_from_mapping(doc: dict) -> RunConfig:
    """Validate a decoded config document and build the run configuration.

    ``detuning_hz`` takes precedence over ``fiber_radius_m``: the radius is
    recomputed so the cavity mode sits at the requested detuning.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(doc) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    fields = {}
    for key, (name, typ) in _PHYSICAL_KEYS.items():
        if key in doc and doc[key] is not None:
            fields[name] = _coerce(key, doc[key], typ)
    cfg = PhysicalConfig(**fields)

    out = doc.get("output") or {}
    if not isinstance(out, dict):
        raise ConfigError("config key 'output' must be an object")
    bad = sorted(set(out) - _OUTPUT_KEYS)
    if bad:
        raise ConfigError(f"unknown config key(s) in 'output': {', '.join(bad)}")
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"config key 'output.format' must be one of {FORMATS}, got {fmt!r}")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("config key 'output.path' must be a string")

    if doc.get("detuning_hz") is not None:
        det = _coerce("detuning_hz", doc["detuning_hz"], float)
        if "fiber_radius_m" in doc:
            warnings.warn(
                "both detuning_hz and fiber_radius_m given; detuning_hz wins and the radius is recomputed",
                UserWarning, stacklevel=2,
            )
        cfg = _retune(cfg, det)
    try:
        cfg.validate()
    except ParameterError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    return RunConfig(cfg, fmt, path)


def _retune(cfg: PhysicalConfig, detuning_hz: float) -> PhysicalConfig:
    try:
        return retune_radius(cfg, TWO_PI * detuning_hz)
    except ParameterError as exc:
        raise ConfigError(f"config key 'detuning_hz': {exc}") from exc


def parse_config(text: str | bytes) -> RunConfig:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_mapping(doc)


# --- serialisation ---------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def emit(table, fmt: str = "csv", columns: list[str] | None = None) -> bytes:
    """Serialise a table (list of dicts) or, for JSON, any report object.

    CSV uses CRLF line ends and shortest round-trip float formatting; the
    header follows the key order of the first row (or ``columns``).
    """
    if fmt == "json":
        return (json.dumps(_jsonable(table), indent=2, allow_nan=False) + "\n").encode("utf-8")
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(table, dict):
        raise ValueError("reports are JSON-only; use --format json")
    rows = list(table)
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue().encode("utf-8")


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_table(data: bytes, fmt: str = "csv"):
    """Inverse of :func:`emit` for tables."""
    text = data.decode("utf-8")
    if fmt == "json":
        return json.loads(text)
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, [])
    return [dict(zip(header, (_parse_cell(c) for c in row))) for row in reader]


def write_output(data: bytes, path: str | None) -> None:
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write output to '{path}': {exc.strerror or exc}") from exc


# --- subcommands -----------------------------------------------------------

def _ghz(x) -> float:
    return float(x) / (TWO_PI * 1e9) + 0.0  # no negative zeros in tables


def _hz(x) -> float:
    return float(x) / TWO_PI


def cmd_dispersion(cfg: PhysicalConfig, args) -> list[dict]:
    p = derive_params(cfg)
    if args.points:
        k = np.linspace(-math.pi / p.a, math.pi / p.a, args.points)
    else:
        k = disp.k_grid(p.N, p.a)
    ep, ee = disp.photon_offset(k, p), disp.exciton_offset(k, p)
    lo, hi = disp.polariton_offsets(k, p)
    ep = np.broadcast_to(ep, k.shape)
    ee = np.broadcast_to(ee, k.shape)
    rows = []
    for i in range(k.size):
        row = {"k_per_m": float(k[i])}
        for name, off in (("E_p", ep[i]), ("E_e", ee[i]), ("E_L", lo[i]), ("E_U", hi[i])):
            row[f"{name}_hz"] = _hz(p.E0 + off)
            row[f"{name}_minus_E0_ghz"] = _ghz(off)
        for name, off in (("2E_L", 2 * lo[i]), ("E_L+E_U", lo[i] + hi[i]), ("2E_U", 2 * hi[i])):
            row[f"{name}_hz"] = _hz(2 * p.E0 + off)
            row[f"{name}_minus_2E0_ghz"] = _ghz(off)
        rows.append(row)
    return rows


def _report_diagnostics(spec: exact2p.SpectrumK0) -> None:
    for d in spec.diagnostics:
        print(f"warning: {d}", file=sys.stderr)


def cmd_spectrum(cfg: PhysicalConfig, args) -> list[dict]:
    p = derive_params(cfg)
    spec = exact2p.solve_spectrum(p)
    _report_diagnostics(spec)
    rows = exact2p.spectrum_table(spec)
    if args.antisymmetric:
        for i, off in enumerate(spec.antisym_levels, start=1):
            rows.append({
                "rho": i, "E_hz": _hz(2 * p.E0 + off), "E_minus_2E0_ghz": _ghz(off),
                "k_eff": None, "classification": "antisymmetric",
                "deltaA": None, "deltaA_scaled": None,
            })
    return rows


def _pick_state(cfg: PhysicalConfig, rho: int, band: str):
    p = derive_params(cfg)
    spec = exact2p.solve_spectrum(p)
    _report_diagnostics(spec)
    label = _BANDS[band]
    states = spec.band(label)
    for st in states:
        if st.rho == rho:
            return p, st
    raise ParameterError(f"no {label} state with rho = {rho} (band holds {len(states)} states)")


_BANDS = {"LL": exact2p.LL, "LU": exact2p.LU, "UU": exact2p.UU, "gap": exact2p.GAP,
          "below": exact2p.BELOW}


def cmd_state(cfg: PhysicalConfig, args) -> list[dict]:
    p, st = _pick_state(cfg, args.rho, args.band)
    return exact2p.state_table(st, p)


def cmd_bare_exciton(cfg: PhysicalConfig, args) -> list[dict]:
    p = derive_params(cfg)
    mu = disp.mu_grid(p.N)
    kap = disp.kappa_grid(p.N, p.a)
    E = bare_energy(mu, 0.0, p.t, p.N)
    g = basis_matrix(p.N)
    nu = disp.nu_grid(p.N)
    rows = []
    for j in range(p.N):
        row = {"mu": float(mu[j]), "kappa_per_m": float(kap[j]),
               "E_hz": _hz(2 * p.E0 + E[j]), "E_minus_2E0_ghz": _ghz(E[j])}
        if args.amplitudes:
            for i, n in enumerate(nu):
                row[f"g_{int(n)}"] = float(g[i, j])
        rows.append(row)
    return rows


def cmd_wavepacket(cfg: PhysicalConfig, args) -> dict:
    p, st = _pick_state(cfg, args.rho, args.band)
    return wavepacket.wavepacket_report(st, p)


def cmd_oracle(cfg: PhysicalConfig, args):
    if args.n is not None:
        cfg = replace(cfg, N=args.n)
        cfg.validate()
    p = derive_params(cfg)
    if p.N > oracle.MAX_SITES:
        raise ParameterError(f"oracle is limited to N <= {oracle.MAX_SITES}")
    result = oracle.solve(p)
    for nu_K in result.unresolved:
        print(f"warning: K sector assignment unresolved near index {nu_K}", file=sys.stderr)
    if args.compare:
        return oracle.compare_k0(p, result)
    rows = []
    sectors = [args.k_sector] if args.k_sector is not None else [int(v) for v in disp.nu_grid(p.N)]
    for nu_K in sectors:
        for j in result.sector(nu_K):
            off = float(result.eigenvalues[j])
            rows.append({
                "nu_K": nu_K,
                "K_per_m": TWO_PI * nu_K / (p.N * p.a),
                "E_hz": _hz(2 * p.E0 + off),
                "E_minus_2E0_ghz": _ghz(off),
                "deltaA": oracle.state_merit(result, int(j)),
            })
    return rows


def cmd_merit_vs_k(cfg: PhysicalConfig, args) -> list[dict]:
    p = derive_params(cfg)
    track = oracle.merit_vs_K(p, args.rho)
    for note in track.ambiguities:
        print(f"warning: {note}", file=sys.stderr)
    return track.rows


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ParameterError(f"bad number list {text!r}") from exc


def cmd_merit_sweep(cfg: PhysicalConfig, args) -> list[dict]:
    if args.a_list:
        spec = sweeps.SweepSpec("lattice_constant", tuple(_float_list(args.a_list)), cfg)
    elif args.delta_list:
        spec = sweeps.SweepSpec("detuning", tuple(_float_list(args.delta_list)), cfg)
    else:
        fr = _float_list(args.delta_g_list)
        spec = sweeps.SweepSpec("detuning", tuple(sweeps.delta_values_in_units_of_G(cfg, fr)), cfg)
    res = sweeps.merit_sweep(spec, jobs=args.jobs)
    for key, notes in res.diagnostics.items():
        for note in notes:
            print(f"warning: [{key}] {note}", file=sys.stderr)
    return res.rows


def cmd_gap_scan(cfg: PhysicalConfig, args) -> list[dict]:
    scan = sweeps.gap_scan(args.a_min, args.a_max, args.steps, cfg, jobs=args.jobs)
    if scan.onset_a is not None:
        print(f"gap state first detected at a = {scan.onset_a!r} m; penetration "
              f"monotonic: {scan.penetration_monotonic}", file=sys.stderr)
    return scan.rows


_JSON_ONLY = {"wavepacket"}
_COLUMNS = {"merit-vs-k": ["nu_K", "K", "E_hz", "E_minus_2E0_ghz", "deltaA"]}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", help="JSON run configuration")
    g.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    g.add_argument("--format", choices=FORMATS, help="output format (default csv)")
    g.add_argument("--jobs", type=int, default=1, metavar="INT", help="worker processes for sweeps")
    o = common.add_argument_group("configuration overrides")
    o.add_argument("--n-sites", type=int)
    o.add_argument("--lattice-constant-m", type=float)
    o.add_argument("--fiber-radius-m", type=float)
    o.add_argument("--transition-freq-hz", type=float)
    o.add_argument("--dipole-au", type=float)
    o.add_argument("--detuning-hz", type=float)
    o.add_argument("--coupling-G-hz", dest="coupling_G_hz", type=float)
    o.add_argument("--hopping-t-hz", type=float)

    ap = argparse.ArgumentParser(prog="twopolariton", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dispersion", parents=[common], help="single- and two-polariton dispersions")
    s.add_argument("--points", type=int, default=0, help="dense k grid instead of the lattice grid")
    s.set_defaults(func=cmd_dispersion)

    s = sub.add_parser("spectrum", parents=[common], help="exact K=0 two-polariton spectrum")
    s.add_argument("--antisymmetric", action="store_true", help="append the antisymmetric levels")
    s.set_defaults(func=cmd_spectrum)

    for name, func, hlp in (("state", cmd_state, "amplitudes of one K=0 state"),
                            ("wavepacket", cmd_wavepacket, "wave-packet decomposition (JSON)")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--rho", type=int, required=True)
        s.add_argument("--band", choices=sorted(_BANDS), default="LL")
        s.set_defaults(func=func)

    s = sub.add_parser("bare-exciton", parents=[common], help="hard-core two-exciton solution")
    s.add_argument("--amplitudes", action="store_true", help="include g_n(mu) columns")
    s.set_defaults(func=cmd_bare_exciton)

    s = sub.add_parser("oracle", parents=[common], help="brute-force diagonalisation")
    s.add_argument("--n", type=int, help="number of sites (overrides config)")
    s.add_argument("--k-sector", type=int, help="only this total-momentum index")
    s.add_argument("--compare", action="store_true", help="diff K=0 against the exact solver (JSON)")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("merit-vs-k", parents=[common], help="Delta A vs total momentum")
    s.add_argument("--rho", type=int, required=True)
    s.set_defaults(func=cmd_merit_vs_k)

    s = sub.add_parser("merit-sweep", parents=[common], help="Delta A over a or detuning")
    m = s.add_mutually_exclusive_group(required=True)
    m.add_argument("--a-list", help="comma-separated lattice constants in m")
    m.add_argument("--delta-list", help="comma-separated detunings in Hz")
    m.add_argument("--delta-g-list", help="comma-separated detunings in units of G")
    s.set_defaults(func=cmd_merit_sweep)

    s = sub.add_parser("gap-scan", parents=[common], help="gap state vs lattice constant")
    s.add_argument("--a-min", type=float, required=True)
    s.add_argument("--a-max", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.set_defaults(func=cmd_gap_scan)
    return ap


def resolve_config(args) -> RunConfig:
    doc = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config '{args.config}': {exc.strerror or exc}") from exc
        doc = json.loads(text) if text.strip() else {}
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    flags = {
        "n_sites": args.n_sites, "lattice_constant_m": args.lattice_constant_m,
        "fiber_radius_m": args.fiber_radius_m, "transition_freq_hz": args.transition_freq_hz,
        "dipole_au": args.dipole_au, "detuning_hz": args.detuning_hz,
        "coupling_G_hz": args.coupling_G_hz, "hopping_t_hz": args.hopping_t_hz,
    }
    for k, v in flags.items():
        if v is not None:
            doc[k] = v
    if args.fiber_radius_m is not None and args.detuning_hz is None:
        # an explicit radius on the command line beats a detuning from the file
        doc.pop("detuning_hz", None)
    run = config_from_mapping(doc)
    fmt = args.format or run.output_format
    out = args.out if args.out is not None else run.output_path
    return RunConfig(run.physical, fmt, out)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
            run = resolve_config(args)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        fmt = "json" if args.command in _JSON_ONLY else run.output_format
        table = args.func(run.physical, args)
        if isinstance(table, dict):
            fmt = "json"
        cols = _COLUMNS.get(args.command) if fmt == "csv" and not table else None
        write_output(emit(table, fmt, cols), run.output_path)
    except ValueError as exc:  # ParameterError, JSON errors, solver preconditions
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
