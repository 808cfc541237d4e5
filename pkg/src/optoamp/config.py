"""Flat ``key = value`` run configuration.

Units are the ones suffixed in the key names (``_m``, ``_hz``, ``_w``, ...).
Lines may carry ``#`` comments. Unknown or repeated keys are errors.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigParseError, ConfigRangeError, MissingKeyError
from .lab.network import SWEEP_ABOVE, SWEEP_BELOW
from .lab.protocol import ACQUISITION_MODES, ProtocolSettings
from .lab.thermal import BathParams
from .params import GAMMA_MAX, MechanicalParams, derive_drive_state, derive_optical_params

REQUIRED = object()


def _positive(v):
    return v > 0


def _finite(v):
    return math.isfinite(v)


# key -> (type, default, validator, description of the constraint)
KEYS = {
    "cavity.length_m": (float, REQUIRED, _positive, "must be > 0"),
    "cavity.finesse": (float, REQUIRED, lambda v: v > math.pi / GAMMA_MAX,
                       f"must exceed pi/{GAMMA_MAX} (gamma = pi/F < {GAMMA_MAX})"),
    "cavity.wavelength_m": (float, REQUIRED, _positive, "must be > 0"),
    "mirror.f_m_hz": (float, REQUIRED, _positive, "must be > 0"),
    "mirror.mass_kg": (float, REQUIRED, _positive, "must be > 0"),
    "mirror.q": (float, REQUIRED, lambda v: v > 1, "must satisfy Q > 1"),
    "drive.power_w": (float, REQUIRED, lambda v: v >= 0, "must be >= 0"),
    "drive.detuning_over_gamma": (float, REQUIRED, _finite, "must be finite"),
    "bath.temperature_k": (float, REQUIRED, _positive, "must be > 0"),
    "run.grid_start_hz": (float, None, _positive, "must be > 0"),
    "run.grid_stop_hz": (float, None, _positive, "must be > 0"),
    "run.grid_points": (int, 2001, lambda v: v >= 16, "must be >= 16"),
    "run.seed": (int, 0, lambda v: v >= 0, "must be >= 0"),
    "run.signal_level_db": (float, 25.0, _finite, "must be finite"),
    "run.drift_hz_per_min": (float, 0.1, _finite, "must be finite"),
    "lab.rbw_hz": (float, 0.05, _positive, "must be > 0"),
    "lab.segments": (int, 10, lambda v: v >= 1, "must be >= 1"),
    "lab.overlap": (float, 0.5, lambda v: 0 <= v <= 0.9, "must be in [0, 0.9]"),
    "lab.span_linewidths": (float, 40.0, _positive, "must be > 0"),
    "lab.sweep_points": (int, 2001, lambda v: v >= 16, "must be >= 16"),
    "lab.sweep_dwell_s": (float, 0.13, lambda v: v >= 0, "must be >= 0"),
    "lab.reconfig_s": (float, 60.0, lambda v: v >= 0, "must be >= 0"),
    "lab.coherent_gain": (float, 1.0, _positive, "must be > 0"),
    "lab.acquisition": (str, "spectral", lambda v: v in ACQUISITION_MODES, f"must be one of {ACQUISITION_MODES}"),
    "lab.sample_rate_hz": (float, 0.0, lambda v: v >= 0, "must be >= 0 (0 = automatic)"),
}

REQUIRED_KEYS = tuple(k for k, entry in KEYS.items() if entry[1] is REQUIRED)


def _attr(key):
    return key.replace(".", "_")


@dataclass(frozen=True)
class RunConfig:
    cavity_length_m: float
    cavity_finesse: float
    cavity_wavelength_m: float
    mirror_f_m_hz: float
    mirror_mass_kg: float
    mirror_q: float
    drive_power_w: float
    drive_detuning_over_gamma: float
    bath_temperature_k: float
    run_grid_start_hz: float = None
    run_grid_stop_hz: float = None
    run_grid_points: int = 2001
    run_seed: int = 0
    run_signal_level_db: float = 25.0
    run_drift_hz_per_min: float = 0.1
    lab_rbw_hz: float = 0.05
    lab_segments: int = 10
    lab_overlap: float = 0.5
    lab_span_linewidths: float = 40.0
    lab_sweep_points: int = 2001
    lab_sweep_dwell_s: float = 0.13
    lab_reconfig_s: float = 60.0
    lab_coherent_gain: float = 1.0
    lab_acquisition: str = "spectral"
    lab_sample_rate_hz: float = 0.0

    def __post_init__(self):
        validate(self)

    def get(self, key):
        if key not in KEYS:
            raise KeyError(key)
        return getattr(self, _attr(key))

    def replace(self, **items):
        """Copy with dotted keys replaced, e.g. ``replace(**{"drive.power_w": 1e-3})``."""
        changes = {}
        for key, value in items.items():
            if key not in KEYS:
                raise KeyError(key)
            changes[_attr(key)] = _convert(key, value)
        return dataclasses.replace(self, **changes)

    @property
    def seed(self):
        return self.run_seed

    def optical(self):
        return derive_optical_params(self.cavity_length_m, self.cavity_finesse, self.cavity_wavelength_m)

    def mechanical(self):
        return MechanicalParams.from_hz(self.mirror_f_m_hz, self.mirror_mass_kg, self.mirror_q)

    def drive(self, power=None, detuning_over_gamma=None):
        return derive_drive_state(
            self.optical(),
            self.drive_power_w if power is None else power,
            self.drive_detuning_over_gamma if detuning_over_gamma is None else detuning_over_gamma,
        )

    def bath(self):
        return BathParams(self.bath_temperature_k)

    def grid(self):
        """Output grid in rad/s."""
        start = self.run_grid_start_hz
        stop = self.run_grid_stop_hz
        f_m = self.mirror_f_m_hz
        if start is None:
            start = f_m - SWEEP_BELOW / (2 * math.pi)
        if stop is None:
            stop = f_m + SWEEP_ABOVE / (2 * math.pi)
        return 2 * math.pi * np.linspace(start, stop, self.run_grid_points)

    def protocol_settings(self):
        return ProtocolSettings(
            rbw_hz=self.lab_rbw_hz,
            segments=self.lab_segments,
            overlap=self.lab_overlap,
            span_linewidths=self.lab_span_linewidths,
            sweep_points=self.lab_sweep_points,
            sweep_dwell_s=self.lab_sweep_dwell_s,
            reconfig_s=self.lab_reconfig_s,
            drift_hz_per_min=self.run_drift_hz_per_min,
            signal_level_db=self.run_signal_level_db,
            coherent_gain=self.lab_coherent_gain,
            acquisition=self.lab_acquisition,
            sample_rate_hz=self.lab_sample_rate_hz,
        )


def _convert(key, raw):
    typ = KEYS[key][0]
    if typ is int:
        if isinstance(raw, str):
            return int(raw.strip())
        if float(raw) != int(raw):
            raise ValueError(f"{raw!r} is not an integer")
        return int(raw)
    if typ is float:
        return float(raw)
    return str(raw).strip()


def validate(cfg):
    for key, (_, default, check, what) in KEYS.items():
        value = getattr(cfg, _attr(key))
        if value is None and default is None:
            continue
        if not check(value):
            raise ConfigRangeError(key, f"{value!r} {what}")
    start = cfg.run_grid_start_hz
    stop = cfg.run_grid_stop_hz
    if start is not None and stop is not None and not start < stop:
        raise ConfigRangeError("run.grid_start_hz", "must be below run.grid_stop_hz")


def parse_config(text):
    """Parse configuration text into a :class:`RunConfig`.

    Raises :class:`ConfigParseError` (with line number) for malformed lines,
    unknown or repeated keys and unconvertible values, then
    :class:`MissingKeyError` naming every absent required key, then
    :class:`ConfigRangeError` for the first out-of-range value.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError(lineno, f"expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEYS:
            raise ConfigParseError(lineno, f"unknown key {key!r}")
        if key in values:
            raise ConfigParseError(lineno, f"duplicate key {key!r}")
        if not raw:
            raise ConfigParseError(lineno, f"empty value for {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError:
            raise ConfigParseError(lineno, f"cannot read {raw!r} as {KEYS[key][0].__name__} for {key!r}") from None
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise MissingKeyError(missing)
    return RunConfig(**{_attr(k): v for k, v in values.items()})


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg):
    """Inverse of :func:`parse_config`; unset optional keys are omitted."""
    lines = []
    for key in KEYS:
        value = getattr(cfg, _attr(key))
        if value is None:
            continue
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


REFERENCE_CONFIG = """\
# reference experiment
cavity.length_m = 500e-6
cavity.finesse = 110000
cavity.wavelength_m = 810e-9
mirror.f_m_hz = 1128.5e3
mirror.mass_kg = 72e-6
mirror.q = 760000
drive.power_w = 4e-3
drive.detuning_over_gamma = -2.97
bath.temperature_k = 300
"""
