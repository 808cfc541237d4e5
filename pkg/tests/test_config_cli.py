import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optoamp import cli
from optoamp.config import (
    KEYS,
    REFERENCE_CONFIG,
    REQUIRED_KEYS,
    load_config,
    parse_config,
    serialize_config,
)
from optoamp.errors import ConfigParseError, ConfigRangeError, MissingKeyError
from optoamp.io import read_csv, write_csv, write_summary
from optoamp.traces import SpectrumTrace


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(REFERENCE_CONFIG)
    return path


def _run(tmp_path, *argv):
    return cli.main([*argv])


# ---- parsing -----------------------------------------------------------------


def test_reference_config_values():
    cfg = parse_config(REFERENCE_CONFIG)
    mech, opt = cfg.mechanical(), cfg.optical()
    assert mech.omega_m / (2 * math.pi) == pytest.approx(1128.5e3)
    assert mech.mass == 72e-6 and mech.q == 760_000
    assert opt.finesse == 110_000 and opt.length == 500e-6 and opt.wavelength == 810e-9
    assert cfg.drive().detuning_over_gamma == -2.97
    assert cfg.bath().temperature == 300
    grid = cfg.grid()
    assert grid.size == 2001
    assert grid[0] == pytest.approx(mech.omega_m - 2 * math.pi * 500)
    assert grid[-1] == pytest.approx(mech.omega_m + 2 * math.pi * 1500)


def test_empty_file_names_every_key():
    with pytest.raises(MissingKeyError) as err:
        parse_config("")
    for key in REQUIRED_KEYS:
        assert key in str(err.value)
    assert len(REQUIRED_KEYS) == 9


def test_negative_q_range_error():
    text = REFERENCE_CONFIG.replace("mirror.q = 760000", "mirror.q = -5")
    with pytest.raises(ConfigRangeError) as err:
        parse_config(text)
    assert "mirror.q" in str(err.value) and "Q > 1" in str(err.value)


@pytest.mark.parametrize(
    "line",
    ["bogus.key = 1", "cavity.length_m = 1e-3", "mirror.mass_kg", "bath.temperature_k =", "run.grid_points = many"],
)
def test_parse_errors_carry_line_numbers(line):
    text = REFERENCE_CONFIG + "\n" + line + "\n"
    lineno = len(REFERENCE_CONFIG.splitlines()) + 2
    with pytest.raises(ConfigParseError) as err:
        parse_config(text)
    assert err.value.lineno == lineno
    assert f"line {lineno}" in str(err.value)


def test_range_checks():
    with pytest.raises(ConfigRangeError):
        parse_config(REFERENCE_CONFIG + "run.grid_points = 8\n")
    with pytest.raises(ConfigRangeError):
        parse_config(REFERENCE_CONFIG + "run.grid_start_hz = 2e6\nrun.grid_stop_hz = 1e6\n")
    with pytest.raises(ConfigRangeError):
        parse_config(REFERENCE_CONFIG.replace("cavity.finesse = 110000", "cavity.finesse = 200"))
    with pytest.raises(ConfigRangeError):
        parse_config(REFERENCE_CONFIG.replace("drive.power_w = 4e-3", "drive.power_w = -1"))


def test_comments_and_optional_keys():
    text = REFERENCE_CONFIG + "run.seed = 12  # trailing comment\nlab.acquisition = timeseries\n"
    cfg = parse_config(text)
    assert cfg.seed == 12 and cfg.lab_acquisition == "timeseries"
    assert cfg.get("run.seed") == 12
    assert cfg.protocol_settings().acquisition == "timeseries"


_optional = {
    "run.grid_points": st.integers(16, 10_000),
    "run.seed": st.integers(0, 2**31),
    "run.signal_level_db": st.floats(-50, 100),
    "run.drift_hz_per_min": st.floats(-1, 1),
    "lab.segments": st.integers(1, 1000),
    "lab.overlap": st.floats(0.0, 0.9),
}


@settings(max_examples=100)
@given(
    length=st.floats(1e-5, 1.0),
    finesse=st.floats(400.0, 1e7),
    f_m=st.floats(1.0, 1e8),
    q=st.floats(1.001, 1e9),
    power=st.floats(0.0, 1.0),
    detuning=st.floats(-100, 100),
    temperature=st.floats(1e-3, 1e3),
    extra=st.fixed_dictionaries({}, optional=_optional),
    start=st.one_of(st.none(), st.floats(1.0, 1e6)),
)
def test_round_trip(length, finesse, f_m, q, power, detuning, temperature, extra, start):
    cfg = parse_config(REFERENCE_CONFIG).replace(
        **{
            "cavity.length_m": length,
            "cavity.finesse": finesse,
            "mirror.f_m_hz": f_m,
            "mirror.q": q,
            "drive.power_w": power,
            "drive.detuning_over_gamma": detuning,
            "bath.temperature_k": temperature,
        },
        **extra,
    )
    if start is not None:
        cfg = cfg.replace(**{"run.grid_start_hz": start, "run.grid_stop_hz": 2 * start})
    assert parse_config(serialize_config(cfg)) == cfg


def test_replace_rejects_unknown_key():
    cfg = parse_config(REFERENCE_CONFIG)
    with pytest.raises(KeyError):
        cfg.replace(**{"drive.watts": 1.0})
    with pytest.raises(KeyError):
        cfg.get("nope")
    assert set(KEYS) >= set(REQUIRED_KEYS)


def test_load_config(config_file):
    assert load_config(config_file) == parse_config(REFERENCE_CONFIG)


# ---- CSV ---------------------------------------------------------------------

GOLDEN = (
    "frequency_hz,amplification\n"
    "1128000,1\n"
    "1128500,0.123456789012\n"
    "1129000,16.5\n"
)


def test_csv_golden_file(tmp_path):
    omega = 2 * math.pi * np.array([1128000.0, 1128500.0, 1129000.0])
    tr = SpectrumTrace(omega, np.array([1.0, 0.1234567890123456, 16.5]), "amplification")
    path = write_csv(tr, tmp_path / "a.csv")
    data = path.read_bytes()
    assert data == GOLDEN.encode()
    assert data.count(b"\n") == 4 and b"\r" not in data


def test_csv_determinism_and_precision(tmp_path):
    rng = np.random.default_rng(0)
    omega = np.sort(rng.uniform(1e6, 1e7, 50))
    traces = [SpectrumTrace(omega, rng.uniform(1e-40, 1e-36, 50), n, "m2_per_hz") for n in ("a", "b")]
    p1 = write_csv(traces, tmp_path / "x.csv")
    p2 = write_csv(traces, tmp_path / "y.csv")
    assert p1.read_bytes() == p2.read_bytes()
    header, data = read_csv(p1)
    assert header == ["frequency_hz", "a_m2_per_hz", "b_m2_per_hz"]
    np.testing.assert_allclose(data[:, 0], omega / (2 * math.pi), rtol=1e-11)
    np.testing.assert_allclose(data[:, 2], traces[1].values, rtol=1e-11)


def test_csv_requires_shared_grid(tmp_path):
    a = SpectrumTrace(np.arange(3.0), np.ones(3), "a")
    b = SpectrumTrace(np.arange(3.0) + 1, np.ones(3), "b")
    with pytest.raises(ValueError):
        write_csv([a, b], tmp_path / "z.csv")


def test_csv_io_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        write_csv(SpectrumTrace(np.arange(3.0), np.ones(3), "a"), blocker / "out.csv")


def test_summary_file(tmp_path):
    p = write_summary({"a": 1.5, "b": "x", "c": True}, tmp_path / "s.txt")
    assert p.read_text() == "a = 1.5\nb = x\nc = True\n"


# ---- CLI ---------------------------------------------------------------------


def test_amplification_command(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["amplification", "--config", str(config_file), "--out", str(out),
                     "--detuning", "-1.87,-2.03,-2.97,-3.64"])
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["amplification_all.csv", "amplification_m1.87.csv", "amplification_m2.03.csv",
                     "amplification_m2.97.csv", "amplification_m3.64.csv"]
    header, data = read_csv(out / "amplification_m2.97.csv")
    assert header == ["frequency_hz", "amplification"]
    assert data[:, 1].max() > 6
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and all("peak A" in ln and "dB beyond SQL" in ln for ln in lines)


def test_sensitivity_command(config_file, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["sensitivity", "--config", str(config_file), "--out", str(out)]) == 0
    header, data = read_csv(out / "sensitivity.csv")
    assert header == ["frequency_hz", "amplified_m2_per_hz", "unamplified_m2_per_hz", "sql_eff_m2_per_hz",
                      "sql_bare_m2_per_hz"]
    assert data[:, 1].min() < data[:, 2].min()
    assert cli.main(["sensitivity", "--config", str(config_file), "--out", str(out), "--amplified", "off",
                     "--finite-bandwidth", "off"]) == 0
    header, data = read_csv(out / "sensitivity.csv")
    assert header[1] == "unamplified_m2_per_hz"
    # narrowband noise never beats the effective SQL
    assert np.all(data[:, 1] >= data[:, 2] * (1 - 1e-9))


def test_spectrum_command(config_file, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["spectrum", "--config", str(config_file), "--out", str(out)]) == 0
    header, _ = read_csv(out / "spectrum.csv")
    assert header[:3] == ["frequency_hz", "thermal_detuned_m2_per_hz", "thermal_bare_m2_per_hz"]


def test_experiment_is_byte_deterministic(config_file, tmp_path):
    for name in ("a", "b"):
        assert cli.main(["experiment", "--config", str(config_file), "--out", str(tmp_path / name),
                         "--seed", "5"]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 4
    for rel in files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_sweep_power(config_file, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["sweep", "--config", str(config_file), "--out", str(out), "--sweep-key", "drive.power_w",
                     "--values", "1e-3,4e-3"]) == 0
    rows = (out / "sweep_summary.csv").read_text().splitlines()
    assert rows[0].startswith("drive.power_w,peak_amplification")
    assert len(rows) == 3
    assert (out / "sweep_p0.001.csv").exists() and (out / "sweep_p0.004.csv").exists()


def test_sweep_with_unstable_point(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["sweep", "--config", str(config_file), "--out", str(out), "--sweep-key",
                     "drive.detuning_over_gamma", "--values", "-2.97,2.97"])
    assert code == 3
    assert "drive.detuning_over_gamma = 2.97" in capsys.readouterr().err
    assert not out.exists() or not any(p.is_file() for p in out.rglob("*"))


def _bad(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    return str(p)


@pytest.mark.parametrize(
    "make_argv,expected",
    [
        (lambda t, c: ["amplification", "--config", _bad(t, "mirror.q = -5\n" + REFERENCE_CONFIG)], 2),
        (lambda t, c: ["amplification", "--config", _bad(t, "what = 1\n")], 2),
        (lambda t, c: ["amplification", "--config", _bad(t, "")], 2),
        (lambda t, c: ["sensitivity", "--config", c, "--power-mw", "0"], 2),
        (lambda t, c: ["sweep", "--config", c, "--sweep-key", "nope", "--values", "1"], 2),
        (lambda t, c: ["sweep", "--config", c], 2),
        (lambda t, c: ["amplification", "--config", c, "--detuning", "2.97"], 3),
        (lambda t, c: ["experiment", "--config", c, "--detuning", "0", "--power-mw", "20"], 0),
        (lambda t, c: ["amplification", "--config", str(t / "missing.cfg")], 1),
        (lambda t, c: ["amplification", "--config", c], 0),
    ],
)
def test_exit_code_matrix(tmp_path, config_file, make_argv, expected):
    argv = make_argv(tmp_path, str(config_file))
    assert cli.main(argv + ["--out", str(tmp_path / "o")]) == expected


def test_unwritable_output_is_io_error(config_file, tmp_path):
    blocker = tmp_path / "blocked"
    blocker.write_text("")
    assert cli.main(["amplification", "--config", str(config_file), "--out", str(blocker)]) == 1


def test_blue_experiment_exits_3(config_file, tmp_path):
    text = REFERENCE_CONFIG.replace("drive.detuning_over_gamma = -2.97", "drive.detuning_over_gamma = 2.97")
    assert cli.main(["experiment", "--config", _bad(tmp_path, text), "--out", str(tmp_path / "o")]) == 3


def test_partial_outputs_removed(config_file, tmp_path, monkeypatch):
    import optoamp.lab.protocol as protocol

    def broken(mapping, path):
        raise OSError(f"disk full writing {path}")

    monkeypatch.setattr(protocol, "write_summary", broken)
    out = tmp_path / "o"
    assert cli.main(["experiment", "--config", str(config_file), "--out", str(out)]) == 1
    assert not out.exists()


def test_failure_keeps_preexisting_files(config_file, tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    (out / "keep.txt").write_text("mine")
    code = cli.main(["amplification", "--config", str(config_file), "--out", str(out), "--detuning", "-2.97,2.97"])
    assert code == 3
    assert [p.name for p in out.iterdir()] == ["keep.txt"]


def test_failure_keeps_preexisting_empty_dir(config_file, tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    code = cli.main(["amplification", "--config", str(config_file), "--out", str(out), "--detuning", "-2.97,2.97"])
    assert code == 3
    assert out.is_dir() and not any(out.iterdir())


def test_run_command_returns_written_files(tmp_path):
    cfg = parse_config(REFERENCE_CONFIG)
    code, paths = cli.run_command("amplification", cfg, {"detuning": [-2.97, -1.87]}, tmp_path / "o")
    assert code == 0
    assert sorted(p.name for p in paths) == ["amplification_all.csv", "amplification_m1.87.csv",
                                             "amplification_m2.97.csv"]
    assert all(p.exists() for p in paths)


def test_run_command_failure_and_bad_flags(tmp_path):
    cfg = parse_config(REFERENCE_CONFIG)
    code, paths = cli.run_command("amplification", cfg, {"detuning": [2.97]}, tmp_path / "o")
    assert (code, paths) == (3, [])
    assert not (tmp_path / "o").exists()
    with pytest.raises(TypeError):
        cli.run_command("amplification", cfg, {"colour": "red"}, tmp_path / "o")
    with pytest.raises(ValueError):
        cli.run_command("plot", cfg)


def test_workers_env(monkeypatch):
    monkeypatch.setenv("OPTOAMP_WORKERS", "3")
    assert cli._workers() == 3
    monkeypatch.setenv("OPTOAMP_WORKERS", "junk")
    assert cli._workers() == 1


def test_bad_flag_values_exit_via_argparse(config_file):
    with pytest.raises(SystemExit) as err:
        cli.main(["amplification", "--config", str(config_file), "--finite-bandwidth", "maybe"])
    assert err.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["plot", "--config", str(config_file)])


def test_module_entry_point(config_file, tmp_path):
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "optoamp", "amplification", "--config", str(config_file),
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert Path(tmp_path / "o" / "amplification_m2.97.csv").exists()
