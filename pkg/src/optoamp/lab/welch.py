"""Welch PSD estimation and its sampling statistics."""
from __future__ import annotations

import math

import numpy as np
from scipy import signal

from ..errors import EmptyInputError, ParameterDomainError
from ..traces import SpectrumTrace


def periodogram(samples, sample_rate, segment_length, overlap=0.5, name="psd", unit="m2_per_hz"):
    """Welch-averaged one-sided PSD with a Hann window.

    Density scaling: white noise of variance ``s2`` sampled at ``fs`` gives
    a flat ``2 s2 / fs``.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptyInputError("no samples")
    segment_length = int(segment_length)
    if segment_length < 2 or segment_length > x.size:
        raise ParameterDomainError(f"segment_length must be in [2, {x.size}], got {segment_length}")
    if not 0.0 <= overlap <= 0.9:
        raise ParameterDomainError(f"overlap must be in [0, 0.9], got {overlap}")
    noverlap = int(round(overlap * segment_length))
    f, pxx = signal.welch(
        x,
        fs=sample_rate,
        window="hann",
        nperseg=segment_length,
        noverlap=noverlap,
        detrend=False,
        scaling="density",
        return_onesided=True,
    )
    return SpectrumTrace(2 * math.pi * f, pxx, name, unit)


def segment_count(n_samples, segment_length, overlap):
    step = segment_length - int(round(overlap * segment_length))
    return 1 + (n_samples - segment_length) // step


def _window_overlap_correlation(shift_fraction, length=4096):
    w = signal.get_window("hann", length)
    s = int(round(shift_fraction * length))
    if s >= length:
        return 0.0
    return float(np.dot(w[: length - s], w[s:]) / np.dot(w, w))


def welch_dof(n_segments, overlap, length=4096):
    """Equivalent chi-squared degrees of freedom of a Hann Welch average.

    Accounts for the correlation between overlapping segments; for
    non-overlapping segments this is ``2 n_segments``.
    """
    step = 1.0 - overlap
    total = 0.0
    for lag in range(1, n_segments):
        rho = _window_overlap_correlation(lag * step, length)
        if rho == 0.0:
            break
        total += (1.0 - lag / n_segments) * rho * rho
    return 2.0 * n_segments / (1.0 + 2.0 * total)


def welch_duration(rbw, n_segments, overlap):
    """Acquisition time (s) of ``n_segments`` segments of length ``1/rbw``."""
    return (1.0 + (n_segments - 1) * (1.0 - overlap)) / rbw


def emulate_welch(psd, n_segments, overlap, rng):
    """Draw a Welch estimate of ``psd`` directly from its sampling distribution.

    Each bin is the expected value times a scaled chi-squared variate with
    :func:`welch_dof` degrees of freedom. Valid when the resolution
    bandwidth is well below the linewidth, so window leakage and
    neighbouring-bin correlation can be neglected.
    """
    nu = welch_dof(n_segments, overlap)
    psd = np.asarray(psd, dtype=float)
    return psd * rng.gamma(0.5 * nu, 2.0 / nu, size=psd.shape)
