"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 configuration or parameter-domain
error, 3 model-validity error (parametric instability, singular response,
negative noise). Files written by a failing command are removed.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import KEYS, load_config
from .errors import ConfigError, EmptyInputError, GridError, InstabilityError, ModelValidityError, ParameterDomainError
from .io import atomic_write_text, write_csv
from .lab.protocol import run_protocol
from .lab.thermal import thermal_psd
from .noise import best_improvement_db, noise_budget, quantum_noise_finite_bandwidth, sensitivity_curve
from .response import amplification_factor, effective_mode_params, mode_grid
from .traces import SpectrumTrace

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_MODEL = 0, 1, 2, 3
COMMANDS = ("amplification", "sensitivity", "spectrum", "experiment", "sweep")
WORKERS_ENV = "OPTOAMP_WORKERS"


@dataclass(frozen=True)
class SweepSpec:
    key: str
    values: tuple
    out: Path

    def __post_init__(self):
        if self.key not in KEYS:
            raise ConfigError(f"sweep key {self.key!r} is not a configuration key")
        if not self.values:
            raise ConfigError("sweep needs at least one value")


class OutputSet:
    """Tracks files written by one command so a failure can remove them.

    Besides the paths registered explicitly, anything that appears under
    ``root`` after construction is treated as this command's output.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.paths = []
        self._existed = self.root.exists()
        self._before = set(self._tree())

    def _tree(self):
        if not self.root.is_dir():
            return []
        return list(self.root.rglob("*"))

    def csv(self, traces, name):
        self.paths.append(write_csv(traces, self.root / name))
        return self.paths[-1]

    def text(self, text, name):
        self.paths.append(atomic_write_text(self.root / name, text))
        return self.paths[-1]

    def extend(self, paths):
        self.paths.extend(paths)

    def discard(self):
        new = [p for p in self._tree() if p not in self._before]
        for p in [Path(p) for p in self.paths] + [p for p in new if not p.is_dir()]:
            try:
                p.unlink()
            except (FileNotFoundError, IsADirectoryError):
                pass
        # deepest first, so nested directories empty out before their parents
        dirs = sorted((p for p in new if p.is_dir()), key=lambda p: len(p.parts), reverse=True)
        if not self._existed and self.root.is_dir():
            dirs.append(self.root)
        for d in dirs:
            try:
                d.rmdir()
            except OSError:
                pass


def _on_off(text):
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="optoamp", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--out", type=Path, default=Path("out"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--detuning", type=_float_list, help="detunings in units of gamma, comma separated")
    parser.add_argument("--power-mw", type=float)
    parser.add_argument("--finite-bandwidth", type=_on_off, default=True, metavar="on|off")
    parser.add_argument("--amplified", type=_on_off, default=True, metavar="on|off")
    parser.add_argument("--sweep-key", help="configuration key to sweep (sweep command)")
    parser.add_argument("--values", type=_float_list, help="values for --sweep-key, comma separated")
    return parser


def _tag(x):
    return f"{x:+.4g}".replace("+", "p").replace("-", "m")


def _workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _analyze_point(cfg, detuning, power, finite_bandwidth):
    """Amplification trace plus the per-curve summary numbers."""
    mech, optical = cfg.mechanical(), cfg.optical()
    drive = cfg.drive(power=power, detuning_over_gamma=detuning)
    mode = effective_mode_params(mech, optical, drive, mode_grid(mech, optical, drive))
    if not mode.stable:
        raise InstabilityError(
            f"detuning {detuning:g} gamma, power {drive.power:g} W: effective damping "
            f"{mode.gamma_eff:.4g} rad/s <= 0 (parametric instability)"
        )
    grid = cfg.grid()
    amp = amplification_factor(mech, optical, drive, grid)
    best_db = math.nan
    if drive.power > 0:
        curve = sensitivity_curve(mech, optical, drive, grid, amplified=True, finite_bandwidth=finite_bandwidth)
        best_db, _ = best_improvement_db(curve, "sql_eff")
    return dict(grid=grid, amp=amp, mode=mode, best_db=best_db, detuning=detuning, power=drive.power)


def _summary_line(label, res):
    i = int(np.argmax(res["amp"]))
    return (
        f"{label}: peak A {res['amp'][i]:.4g} at {res['grid'][i] / (2 * math.pi):.6f} Hz, "
        f"f_eff {res['mode'].omega_eff / (2 * math.pi):.6f} Hz, gamma_eff {res['mode'].gamma_eff:.4g} rad/s, "
        f"max {res['best_db']:.3f} dB beyond SQL"
    )


def _power(cfg, args):
    return cfg.drive_power_w if args.power_mw is None else args.power_mw * 1e-3


def cmd_amplification(cfg, args, out):
    detunings = args.detuning or [cfg.drive_detuning_over_gamma]
    power = _power(cfg, args)
    with ThreadPoolExecutor(_workers()) as pool:
        results = list(pool.map(lambda d: _analyze_point(cfg, d, power, args.finite_bandwidth), detunings))
    traces = []
    for res in results:
        tr = SpectrumTrace(res["grid"], res["amp"], "amplification")
        out.csv(tr, f"amplification_{_tag(res['detuning'])}.csv")
        traces.append(SpectrumTrace(res["grid"], res["amp"], f"amplification_{_tag(res['detuning'])}"))
        print(_summary_line(f"detuning {res['detuning']:+g} gamma", res))
    out.csv(traces, "amplification_all.csv")


def cmd_sensitivity(cfg, args, out):
    mech, optical = cfg.mechanical(), cfg.optical()
    detuning = (args.detuning or [cfg.drive_detuning_over_gamma])[0]
    drive = cfg.drive(power=_power(cfg, args), detuning_over_gamma=detuning)
    grid = cfg.grid()
    fb = args.finite_bandwidth
    res = _analyze_point(cfg, detuning, drive.power, fb)
    unamp = sensitivity_curve(mech, optical, drive, grid, amplified=False, finite_bandwidth=fb)
    traces = []
    if args.amplified:
        amp = sensitivity_curve(mech, optical, drive, grid, amplified=True, finite_bandwidth=fb)
        traces.append(SpectrumTrace(grid, amp.s_x_sig_equiv, "amplified", "m2_per_hz"))
    traces += [
        SpectrumTrace(grid, unamp.s_x_sig_equiv, "unamplified", "m2_per_hz"),
        SpectrumTrace(grid, unamp.sql_eff, "sql_eff", "m2_per_hz"),
        SpectrumTrace(grid, unamp.sql_bare, "sql_bare", "m2_per_hz"),
    ]
    out.csv(traces, "sensitivity.csv")
    print(_summary_line(f"detuning {detuning:+g} gamma, power {drive.power * 1e3:g} mW", res))
    if args.amplified:
        db_bare, at = best_improvement_db(amp, "sql_bare")
        print(f"max {db_bare:.3f} dB beyond the bare-mirror SQL at {at / (2 * math.pi):.6f} Hz")


def cmd_spectrum(cfg, args, out):
    mech, optical, bath = cfg.mechanical(), cfg.optical(), cfg.bath()
    detuning = (args.detuning or [cfg.drive_detuning_over_gamma])[0]
    drive = cfg.drive(power=_power(cfg, args), detuning_over_gamma=detuning)
    grid = cfg.grid()
    traces = [
        SpectrumTrace(grid, thermal_psd(mech, optical, drive, bath, grid), "thermal_detuned", "m2_per_hz"),
        SpectrumTrace(grid, thermal_psd(mech, optical, None, bath, grid), "thermal_bare", "m2_per_hz"),
    ]
    if drive.power > 0:
        budget = noise_budget(mech, optical, drive, grid)
        traces += [
            SpectrumTrace(grid, budget.shot, "shot", "m2_per_hz"),
            SpectrumTrace(grid, budget.backaction, "backaction", "m2_per_hz"),
            SpectrumTrace(grid, budget.total, "quantum_narrowband", "m2_per_hz"),
            SpectrumTrace(grid, quantum_noise_finite_bandwidth(mech, optical, drive, grid),
                          "quantum_finite_bandwidth", "m2_per_hz"),
            SpectrumTrace(grid, budget.sql, "sql_eff", "m2_per_hz"),
        ]
    out.csv(traces, "spectrum.csv")
    peak = int(np.argmax(traces[0].values))
    print(f"thermal (detuned) peak {traces[0].values[peak]:.4g} m^2/Hz at {grid[peak] / (2 * math.pi):.6f} Hz")


def cmd_experiment(cfg, args, out):
    seed = cfg.seed if args.seed is None else args.seed
    record = run_protocol(cfg, seed)
    out.extend(record.save(out.root / "experiment"))
    eff, (wb, gb) = record.fitted_eff, record.fitted_bare
    grid = cfg.grid()
    print(
        f"seed {seed}: fitted f_eff {eff.omega_eff / (2 * math.pi):.6f} Hz, gamma_eff {eff.gamma_eff:.4g} rad/s; "
        f"fitted f_m {wb / (2 * math.pi):.6f} Hz, gamma {gb:.4g} rad/s; drift {record.drift_applied:.4g} Hz; "
        f"implied peak A {np.max(record.implied_amplification(grid)):.4g}, "
        f"swept peak {np.max(record.swept_response.values):.4g}"
    )


def cmd_sweep(cfg, args, out):
    if not args.sweep_key or not args.values:
        raise ConfigError("sweep needs --sweep-key and --values")
    sweep = SweepSpec(args.sweep_key, tuple(args.values), out.root)
    configs = [cfg.replace(**{sweep.key: v}) for v in sweep.values]

    def point(item):
        value, c = item
        try:
            return _analyze_point(c, c.drive_detuning_over_gamma, c.drive_power_w, args.finite_bandwidth)
        except ModelValidityError as exc:
            raise type(exc)(f"{sweep.key} = {value:g}: {exc}") from exc

    with ThreadPoolExecutor(_workers()) as pool:
        results = list(pool.map(point, zip(sweep.values, configs)))
    rows = [f"{sweep.key},peak_amplification,f_eff_hz,gamma_eff_rad_s,max_db_beyond_sql"]
    for value, res in zip(sweep.values, results):
        out.csv(SpectrumTrace(res["grid"], res["amp"], "amplification"), f"sweep_{_tag(value)}.csv")
        rows.append(
            ",".join(
                format(x, ".12g")
                for x in (value, res["amp"].max(), res["mode"].omega_eff / (2 * math.pi), res["mode"].gamma_eff,
                          res["best_db"])
            )
        )
        print(_summary_line(f"{sweep.key} = {value:g}", res))
    out.text("\n".join(rows) + "\n", "sweep_summary.csv")


HANDLERS = {
    "amplification": cmd_amplification,
    "sensitivity": cmd_sensitivity,
    "spectrum": cmd_spectrum,
    "experiment": cmd_experiment,
    "sweep": cmd_sweep,
}


def exit_code_for(exc):
    if isinstance(exc, ModelValidityError):
        return EXIT_MODEL
    if isinstance(exc, (ConfigError, ParameterDomainError, GridError, EmptyInputError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


# flags whose values are number lists that may start with a minus sign
_NUMERIC_FLAGS = ("--detuning", "--values", "--power-mw")


def _join_numeric_flags(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _NUMERIC_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


_HANDLED = (ConfigError, ParameterDomainError, GridError, EmptyInputError, ModelValidityError, OSError)


def _fail(name, out, exc):
    if out is not None:
        out.discard()
    print(f"optoamp {name}: error: {exc}", file=sys.stderr)
    return exit_code_for(exc)


def run_command(name, config, flags=None, out_dir="out"):
    """Run one command on a parsed configuration.

    Parameters
    ----------
    name : str
        One of ``COMMANDS``.
    config : RunConfig
    flags : dict, optional
        Command options keyed by attribute name (``detuning``, ``power_mw``,
        ``finite_bandwidth``, ``amplified``, ``sweep_key``, ``values``,
        ``seed``) with already-converted values.
    out_dir : path-like

    Returns
    -------
    (int, list of Path)
        Exit status and the files written. On failure nothing is left behind
        and the list is empty.
    """
    if name not in HANDLERS:
        raise ValueError(f"unknown command {name!r}; expected one of {COMMANDS}")
    args = build_parser().parse_args([name, "--config", "", "--out", str(out_dir)])
    for key, value in (flags or {}).items():
        if key in ("command", "config", "out") or not hasattr(args, key):
            raise TypeError(f"unknown flag {key!r}")
        setattr(args, key, value)
    out = OutputSet(args.out)
    try:
        HANDLERS[name](config, args, out)
    except _HANDLED as exc:
        return _fail(name, out, exc), []
    except BaseException:
        out.discard()
        raise
    return EXIT_OK, list(out.paths)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_numeric_flags(argv))
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.replace(**{"run.seed": args.seed})
    except _HANDLED as exc:
        return _fail(args.command, None, exc)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out")}
    return run_command(args.command, cfg, flags, args.out)[0]

if __name__ == "__main__":
    sys.exit(main())
