"""Thermal displacement noise of the (optically modified) mirror mode."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InstabilityError, ParameterDomainError
from ..params import CONSTANTS
from ..response import _as_grid, _restore, chi, chi_eff, effective_damping, local_mode


@dataclass(frozen=True)
class BathParams:
    temperature: float

    def __post_init__(self):
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise ParameterDomainError(f"temperature must be > 0 K, got {self.temperature!r}")


def thermal_psd(mech, optical, drive, bath, omega):
    """One-sided displacement PSD ``4 kB T Im chi_eff / Omega`` in m^2/Hz.

    ``drive`` may be ``None`` for the bare mode.
    """
    grid, shape = _as_grid(omega)
    if np.any(grid <= 0):
        raise ParameterDomainError("thermal PSD needs omega > 0")
    if drive is None or drive.intensity == 0.0:
        response = chi(mech, grid)
    else:
        damping = effective_damping(mech, optical, drive)
        if damping <= 0:
            raise InstabilityError(f"effective damping {damping:.4g} rad/s <= 0: mode is parametrically unstable")
        response = chi_eff(mech, optical, drive, grid)
    s = 4.0 * CONSTANTS.kB * bath.temperature * response.imag / grid
    return _restore(s, shape)


class ThermalNoiseModel:
    """Callable thermal PSD over ordinary frequency (Hz), for synthesis.

    ``drift`` (rad/s per s) and ``window`` ``(t0, t1)`` in s average the
    spectrum over a linear resonance drift during the acquisition.
    """

    def __init__(self, mech, optical, drive, bath, drift=0.0, window=(0.0, 0.0), substeps=16):
        self.mech = mech
        self.optical = optical
        self.drive = drive
        self.bath = bath
        t0, t1 = window
        if drift == 0.0 or t1 <= t0:
            times = np.array([0.5 * (t0 + t1)])
        else:
            times = t0 + (np.arange(substeps) + 0.5) / substeps * (t1 - t0)
        self._mechs = [mech.shifted(drift * t) if drift else mech for t in times]
        mid = mech.shifted(drift * 0.5 * (t0 + t1)) if drift else mech
        self.mode = local_mode(mid, optical, drive)

    def psd_omega(self, omega):
        omega = np.asarray(omega, dtype=float)
        acc = np.zeros_like(omega)
        for m in self._mechs:
            acc += thermal_psd(m, self.optical, self.drive, self.bath, omega)
        return acc / len(self._mechs)

    def __call__(self, freq_hz):
        return self.psd_omega(2.0 * math.pi * np.asarray(freq_hz, dtype=float))
