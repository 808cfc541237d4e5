"""Three-step measurement protocol.

1. Detuned probe on: record the thermal noise spectrum and fit it, which
   gives the effective resonance and damping.
2. Sweep a cavity-length modulation across the resonance and record the
   normalized response (the amplification trace).
3. Probe off, resonant locking beam only: record and fit the thermal noise
   again, which gives the bare mode.

The bare resonance drifts linearly in time. Each thermal spectrum is
averaged over the drift during its own acquisition; the sweep sees the mode
at the sweep midpoint. Elapsed time is the sum of acquisition durations
plus a fixed reconfiguration time between steps.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InstabilityError, ParameterDomainError
from ..io import write_csv, write_summary
from ..response import EffectiveModeParams
from ..traces import SpectrumTrace
from .fitting import FitResult, fit_lorentzian
from .network import SWEEP_ABOVE, SWEEP_BELOW, swept_sine_response
from .synthesis import synthesize_timeseries
from .thermal import ThermalNoiseModel
from .welch import emulate_welch, periodogram, welch_duration

ACQUISITION_MODES = ("spectral", "timeseries")


@dataclass(frozen=True)
class ProtocolSettings:
    """Analyzer and timing assumptions (none are given by the experiment).

    The defaults add up to a ten-minute protocol: two 110 s thermal
    acquisitions at 0.05 Hz resolution, a 260 s sweep and two 60 s
    reconfigurations.

    ``acquisition="spectral"`` draws each Welch estimate from its sampling
    distribution; ``"timeseries"`` synthesizes the displacement record and
    runs the estimator on it, which is only affordable for modes much
    wider or lower in frequency than the reference mirror.
    """

    rbw_hz: float = 0.05
    segments: int = 10
    overlap: float = 0.5
    span_linewidths: float = 40.0
    sweep_points: int = 2001
    sweep_dwell_s: float = 0.13
    reconfig_s: float = 60.0
    drift_hz_per_min: float = 0.1
    signal_level_db: float = 25.0
    coherent_gain: float = 1.0
    acquisition: str = "spectral"
    sample_rate_hz: float = 0.0
    max_samples: int = 50_000_000

    def __post_init__(self):
        if self.acquisition not in ACQUISITION_MODES:
            raise ParameterDomainError(f"acquisition must be one of {ACQUISITION_MODES}")
        if self.rbw_hz <= 0 or self.segments < 1 or not 0 <= self.overlap <= 0.9:
            raise ParameterDomainError("invalid analyzer settings")
        if self.sweep_points < 16 or self.sweep_dwell_s < 0 or self.reconfig_s < 0:
            raise ParameterDomainError("invalid sweep settings")

    @property
    def drift_rate(self):
        """Drift in rad/s per second."""
        return 2 * math.pi * self.drift_hz_per_min / 60.0

    @property
    def thermal_duration(self):
        return welch_duration(self.rbw_hz, self.segments, self.overlap)

    @property
    def sweep_duration(self):
        return self.sweep_points * self.sweep_dwell_s


@dataclass(frozen=True)
class ExperimentRecord:
    thermal_psd_detuned: SpectrumTrace
    swept_response: SpectrumTrace
    thermal_psd_bare: SpectrumTrace
    fitted_eff: EffectiveModeParams
    fitted_bare: tuple
    drift_applied: float
    fit_eff: FitResult
    fit_bare: FitResult
    injected_eff: EffectiveModeParams
    injected_bare: tuple
    timeline: dict
    seed: int
    settings: ProtocolSettings = field(repr=False)

    def implied_amplification(self, omega):
        """``|chi_eff / chi|^2`` rebuilt from the two fitted oscillators."""
        omega = np.asarray(omega, dtype=float)
        wb, gb = self.fitted_bare
        we, ge = self.fitted_eff.omega_eff, self.fitted_eff.gamma_eff
        num = wb * wb - omega * omega - 1j * omega * gb
        den = we * we - omega * omega - 1j * omega * ge
        return np.abs(num / den) ** 2

    def summary(self):
        out = {
            "seed": self.seed,
            "acquisition": self.settings.acquisition,
            "fit_eff.center_hz": self.fitted_eff.omega_eff / (2 * math.pi),
            "fit_eff.width_rad_s": self.fitted_eff.gamma_eff,
            "fit_eff.converged": self.fit_eff.converged,
            "fit_bare.center_hz": self.fitted_bare[0] / (2 * math.pi),
            "fit_bare.width_rad_s": self.fitted_bare[1],
            "fit_bare.converged": self.fit_bare.converged,
            "injected_eff.center_hz": self.injected_eff.omega_eff / (2 * math.pi),
            "injected_eff.width_rad_s": self.injected_eff.gamma_eff,
            "injected_bare.center_hz": self.injected_bare[0] / (2 * math.pi),
            "injected_bare.width_rad_s": self.injected_bare[1],
            "drift_applied_hz": self.drift_applied,
            "swept_peak": float(np.max(self.swept_response.values)),
        }
        for key, value in self.timeline.items():
            out[f"timeline.{key}_s"] = value
        for key, value in asdict(self.settings).items():
            out[f"settings.{key}"] = value
        return out

    def save(self, directory):
        """Write the traces as CSV and the fit summary as ``summary.txt``."""
        directory = Path(directory)
        paths = [
            write_csv(self.thermal_psd_detuned, directory / "thermal_detuned.csv"),
            write_csv(self.swept_response, directory / "swept_response.csv"),
            write_csv(self.thermal_psd_bare, directory / "thermal_bare.csv"),
            write_summary(self.summary(), directory / "summary.txt"),
        ]
        return paths


def _band(center, half_width, rbw_hz):
    lo = (center - half_width) / (2 * math.pi)
    hi = (center + half_width) / (2 * math.pi)
    k = np.arange(math.floor(lo / rbw_hz), math.ceil(hi / rbw_hz) + 1)
    return 2 * math.pi * rbw_hz * k


def _acquire(model, settings, seed_seq, name):
    mode = model.mode
    band = _band(mode.omega_eff, settings.span_linewidths * abs(mode.gamma_eff), settings.rbw_hz)
    if settings.acquisition == "spectral":
        rng = np.random.default_rng(seed_seq)
        values = emulate_welch(model.psd_omega(band), settings.segments, settings.overlap, rng)
        return SpectrumTrace(band, values, name, "m2_per_hz")

    fs = settings.sample_rate_hz or 4.5 * mode.omega_eff / (2 * math.pi)
    nperseg = int(round(fs / settings.rbw_hz))
    step = nperseg - int(round(settings.overlap * nperseg))
    n = nperseg + (settings.segments - 1) * step
    if n > settings.max_samples:
        raise ParameterDomainError(
            f"time-series acquisition needs {n} samples (> max_samples {settings.max_samples}); "
            "use acquisition='spectral'"
        )
    x = synthesize_timeseries(model, n / fs, fs, seed_seq)
    est = periodogram(x, fs, nperseg, settings.overlap)
    keep = (est.omega >= band[0] - 1e-9) & (est.omega <= band[-1] + 1e-9)
    return SpectrumTrace(est.omega[keep], est.values[keep], name, "m2_per_hz")


def run_protocol_params(mech, optical, drive, bath, settings, seed):
    """Run the protocol from explicit parameter records."""
    rate = settings.drift_rate
    d_th = settings.thermal_duration
    d_sw = settings.sweep_duration
    t1 = (0.0, d_th)
    t2 = (t1[1] + settings.reconfig_s, t1[1] + settings.reconfig_s + d_sw)
    t3 = (t2[1] + settings.reconfig_s, t2[1] + settings.reconfig_s + d_th)
    seq_eff, seq_bare = np.random.SeedSequence(seed).spawn(2)

    detuned = ThermalNoiseModel(mech, optical, drive, bath, drift=rate, window=t1)
    if not detuned.mode.stable:
        raise InstabilityError(
            f"probe drive is beyond the parametric instability (effective damping {detuned.mode.gamma_eff:.4g} rad/s)"
        )
    psd_eff = _acquire(detuned, settings, seq_eff, "psd_detuned")
    fit_eff = fit_lorentzian(psd_eff, relative_noise=True)

    t2_mid = 0.5 * (t2[0] + t2[1])
    margin = 2 * math.pi * 5.0 + abs(rate) * t3[1]
    sweep = np.linspace(
        mech.omega_m - SWEEP_BELOW - margin, mech.omega_m + SWEEP_ABOVE + margin, settings.sweep_points
    )
    swept = swept_sine_response(
        mech.shifted(rate * t2_mid),
        optical,
        drive,
        bath,
        sweep,
        signal_level_db=settings.signal_level_db,
        coherent_gain=settings.coherent_gain,
    )

    bare = ThermalNoiseModel(mech, optical, None, bath, drift=rate, window=t3)
    psd_bare = _acquire(bare, settings, seq_bare, "psd_bare")
    fit_bare = fit_lorentzian(psd_bare, relative_noise=True)

    t3_mid = 0.5 * (t3[0] + t3[1])
    return ExperimentRecord(
        thermal_psd_detuned=psd_eff,
        swept_response=swept,
        thermal_psd_bare=psd_bare,
        fitted_eff=EffectiveModeParams(fit_eff.center, fit_eff.width, fit_eff.width > 0),
        fitted_bare=(fit_bare.center, fit_bare.width),
        drift_applied=settings.drift_hz_per_min * t3_mid / 60.0,
        fit_eff=fit_eff,
        fit_bare=fit_bare,
        injected_eff=detuned.mode,
        injected_bare=(bare.mode.omega_eff, bare.mode.gamma_eff),
        timeline={
            "detuned_start": t1[0],
            "detuned_end": t1[1],
            "sweep_start": t2[0],
            "sweep_end": t2[1],
            "bare_start": t3[0],
            "bare_end": t3[1],
        },
        seed=int(seed),
        settings=settings,
    )


def run_protocol(config, seed=None):
    """Run the protocol for a :class:`~optoamp.config.RunConfig`."""
    seed = config.seed if seed is None else seed
    return run_protocol_params(
        config.mechanical(), config.optical(), config.drive(), config.bath(), config.protocol_settings(), seed
    )
