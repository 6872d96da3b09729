import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from twopolariton import cli
from twopolariton.params import PhysicalConfig, TWO_PI, derive_params


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# --- configuration -------------------------------------------------------------

def test_empty_config_is_default():
    assert cli.parse_config("{}").physical == PhysicalConfig()
    assert cli.parse_config("").physical == PhysicalConfig()


def test_config_keys_map_to_fields():
    run = cli.parse_config(json.dumps({
        "n_sites": 8, "lattice_constant_m": 1e-6, "fiber_radius_m": 3e-7,
        "transition_freq_hz": 3.8e14, "dipole_au": 2.0, "coupling_G_hz": 1e9,
        "hopping_t_hz": 1e6, "output": {"format": "json", "path": "x.json"},
    }))
    c = run.physical
    assert (c.N, c.a, c.R, c.f0, c.d, c.override_G, c.override_t) == (8, 1e-6, 3e-7, 3.8e14, 2.0, 1e9, 1e6)
    assert run.output_format == "json" and run.output_path == "x.json"


@pytest.mark.parametrize("doc,needle", [
    ({"n_sites": 7}, "even"),
    ({"n_sites": 8.5}, "n_sites"),
    ({"lattice_constant_m": -1.0}, "a must be positive"),
    ({"colour": 1}, "colour"),
    ({"output": {"format": "xml"}}, "output.format"),
    ({"output": {"style": 1}}, "style"),
    ({"dipole_au": "big"}, "dipole_au"),
    ({"detuning_hz": -1e15}, "detuning_hz"),
])
def test_config_rejections(doc, needle):
    with pytest.raises(cli.ConfigError, match=needle):
        cli.parse_config(json.dumps(doc))


def test_config_not_json():
    with pytest.raises(cli.ConfigError, match="JSON"):
        cli.parse_config("{n_sites: 8")
    with pytest.raises(cli.ConfigError):
        cli.parse_config("[1, 2]")


def test_detuning_wins_over_radius():
    with pytest.warns(UserWarning, match="detuning_hz wins"):
        run = cli.parse_config(json.dumps({"fiber_radius_m": 1e-6, "detuning_hz": 2e9}))
    p = derive_params(run.physical)
    assert p.delta == TWO_PI * 2e9
    assert run.physical.R != 1e-6


# --- serialisation ----------------------------------------------------------------

def test_empty_table_header_only():
    assert cli.emit([], "csv", ["a", "b"]) == b"a,b\r\n"
    assert cli.emit([], "csv") == b"\r\n"


def test_csv_layout():
    data = cli.emit([{"x": 0.1, "name": "LL-band", "n": 3, "none": None}], "csv")
    assert data == b"x,name,n,none\r\n0.1,LL-band,3,\r\n"


cell = st.one_of(
    st.floats(allow_nan=False, allow_infinity=False),
    st.integers(-10**12, 10**12),
    st.none(),
    st.text(alphabet="abcXYZ-_ ,\"", min_size=1).filter(lambda s: s not in ("true", "false")),
)


def _not_numeric(s):
    try:
        float(s)
        return False
    except ValueError:
        return True


@given(st.lists(st.fixed_dictionaries({
    "f": st.floats(allow_nan=False, allow_infinity=False),
    "i": st.integers(-10**12, 10**12),
    "s": st.text(alphabet="abcXYZ-_ ,\"\n", min_size=1).filter(_not_numeric),
    "o": st.none(),
}), max_size=6))
def test_csv_round_trip(rows):
    back = cli.read_table(cli.emit(rows, "csv", ["f", "i", "s", "o"]))
    assert len(back) == len(rows)
    for r, b in zip(rows, back):
        assert b["f"] == r["f"] and math.copysign(1, b["f"]) == math.copysign(1, r["f"])
        assert b["i"] == r["i"] and b["s"] == r["s"] and b["o"] is None


@given(st.lists(st.dictionaries(st.sampled_from("abc"), cell), max_size=4))
def test_json_round_trip(rows):
    assert cli.read_table(cli.emit(rows, "json"), "json") == rows


def test_reports_are_json_only():
    with pytest.raises(ValueError):
        cli.emit({"a": 1}, "csv")
    with pytest.raises(ValueError):
        cli.emit([], "xml")


def test_json_handles_numpy_and_inf():
    import numpy as np

    doc = json.loads(cli.emit({"v": np.arange(3), "x": np.float64(1.5), "inf": math.inf}, "json"))
    assert doc == {"v": [0, 1, 2], "x": 1.5, "inf": "inf"}


def test_write_output_error(tmp_path):
    with pytest.raises(OSError, match="cannot write output"):
        cli.write_output(b"x", str(tmp_path / "missing" / "out.csv"))


# --- subcommands ---------------------------------------------------------------------

SMALL = ["--n-sites", "8"]


@pytest.mark.parametrize("argv", [
    ["dispersion"],
    ["dispersion", "--points", "5"],
    ["spectrum", "--antisymmetric"],
    ["state", "--rho", "2"],
    ["bare-exciton", "--amplitudes", "--hopping-t-hz", "1e6"],
    ["merit-sweep", "--a-list", "1e-6,5e-6"],
    ["merit-sweep", "--delta-g-list=-0.5,0,1"],
    ["gap-scan", "--a-min", "1e-5", "--a-max", "6e-5", "--steps", "3"],
    ["oracle", "--k-sector", "0"],
    ["merit-vs-k", "--rho", "2"],
])
def test_subcommands_csv(argv, capsys):
    code, out, err = run(argv + SMALL, capsys)
    assert code == 0, err
    rows = cli.read_table(out.encode())
    assert rows
    assert out.encode().count(b"\r\n") == len(rows) + 1


def test_subcommand_outputs_are_deterministic(capsys):
    argv = ["spectrum", "--n-sites", "12", "--detuning-hz", "0"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second


def test_spectrum_columns(capsys):
    _, out, _ = run(["spectrum"] + SMALL, capsys)
    header = out.split("\r\n")[0]
    assert header == "rho,E_hz,E_minus_2E0_ghz,k_eff,classification,deltaA,deltaA_scaled"


def test_wavepacket_json(capsys):
    code, out, _ = run(["wavepacket", "--rho", "3"] + SMALL, capsys)
    assert code == 0
    doc = json.loads(out)
    assert {"A0_direct", "A0_reconstructed", "A0_approx", "lambda_row_sums", "e_mu"} <= set(doc)


def test_oracle_compare_json(capsys):
    code, out, _ = run(["oracle", "--n", "6", "--compare"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["n_exact"] == doc["n_oracle"] == 13
    assert doc["max_rel_diff"] < 1e-9


def test_json_format_and_out_file(tmp_path, capsys):
    path = tmp_path / "disp.json"
    code, out, _ = run(["dispersion", "--format", "json", "--out", str(path)] + SMALL, capsys)
    assert code == 0 and out == ""
    rows = json.loads(path.read_text())
    assert len(rows) == 8 and "E_p_hz" in rows[0]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n_sites": 12, "output": {"format": "json"}}))
    code, out, _ = run(["dispersion", "--config", str(cfg), "--n-sites", "6"], capsys)
    assert code == 0
    assert len(json.loads(out)) == 6


def test_radius_flag_beats_file_detuning(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"detuning_hz": 1e9}))
    args = cli.build_parser().parse_args(["dispersion", "--config", str(cfg), "--fiber-radius-m", "3e-7"])
    assert cli.resolve_config(args).physical.R == 3e-7


@pytest.mark.parametrize("argv,code,needle", [
    (["spectrum", "--n-sites", "7"], 2, "even"),
    (["state", "--rho", "99", "--n-sites", "8"], 2, "no LL-band state"),
    (["spectrum", "--coupling-G-hz", "0"], 2, "G > 0"),
    (["spectrum", "--config", "/nonexistent/cfg.json"], 2, "cannot read config"),
    (["merit-sweep", "--a-list", "2e-6,1e-6"], 2, "strictly increasing"),
    (["merit-sweep", "--a-list", "x"], 2, "bad number list"),
    (["spectrum", "--jobs", "0"], 2, "--jobs"),
    (["dispersion", "--out", "/nonexistent/dir/out.csv"], 1, "cannot write output"),
])
def test_error_exits(argv, code, needle, capsys):
    got, out, err = run(argv, capsys)
    assert got == code
    assert needle in err
    assert out == ""


def test_warning_reaches_stderr(capsys):
    code, _, err = run(["dispersion", "--fiber-radius-m", "3e-7", "--detuning-hz", "0"] + SMALL, capsys)
    assert code == 0
    assert "detuning_hz wins" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twopolariton", "bare-exciton", "--n-sites", "4"],
                          capture_output=True, check=True)
    assert proc.stdout.startswith(b"mu,kappa_per_m,E_hz,E_minus_2E0_ghz\r\n")
