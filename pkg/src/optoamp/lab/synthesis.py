"""Stationary Gaussian noise with a prescribed one-sided PSD."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterDomainError


def synthesize_timeseries(psd_model, duration, sample_rate, seed, mode=None):
    """Draw a real Gaussian series whose one-sided PSD is ``psd_model(f_hz)``.

    White complex Gaussian noise is coloured bin by bin in the frequency
    domain and transformed back, so the series is periodic over
    ``duration``. ``mode`` (an object with ``omega_eff`` and ``gamma_eff``)
    enables the sampling checks; it defaults to ``psd_model.mode`` when the
    model carries one.
    """
    if duration <= 0 or sample_rate <= 0:
        raise ParameterDomainError("duration and sample_rate must be > 0")
    mode = mode if mode is not None else getattr(psd_model, "mode", None)
    if mode is not None:
        f_res = mode.omega_eff / (2 * math.pi)
        if sample_rate <= 4.0 * f_res:
            raise ParameterDomainError(
                f"undersampled: sample_rate {sample_rate:.6g} Hz must exceed 4 x {f_res:.6g} Hz"
            )
        min_duration = 100.0 / (2 * math.pi * mode.gamma_eff)
        if duration < min_duration:
            raise ParameterDomainError(f"duration too short: need >= {min_duration:.4g} s for this linewidth")
    n = int(round(duration * sample_rate))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    psd = np.zeros(freqs.size)
    psd[1:] = np.asarray(psd_model(freqs[1:]), dtype=float)
    if np.any(psd < 0) or not np.all(np.isfinite(psd)):
        raise ParameterDomainError("PSD model must be finite and non-negative")
    rng = np.random.default_rng(seed)
    noise = (rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)) * math.sqrt(0.5)
    scale = np.sqrt(psd * sample_rate * n / 2.0)
    if n % 2 == 0:
        # the Nyquist bin is real and carries a one-sided weight of 1
        noise[-1] = rng.standard_normal()
        scale[-1] *= math.sqrt(2.0)
    return np.fft.irfft(scale * noise, n)
