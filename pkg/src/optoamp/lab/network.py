"""Swept-sine (network analyzer) response of the detuned cavity."""
from __future__ import annotations

import math

import numpy as np

from ..errors import GridError
from ..response import amplification_factor
from ..traces import SpectrumTrace
from .thermal import thermal_psd

#: Normalization point above the bare resonance (rad/s).
REFERENCE_OFFSET = 2 * math.pi * 1e3
#: Minimum sweep coverage relative to the bare resonance (rad/s).
SWEEP_BELOW = 2 * math.pi * 500.0
SWEEP_ABOVE = 2 * math.pi * 1500.0


def default_sweep_grid(mech, points=2001):
    return np.linspace(mech.omega_m - SWEEP_BELOW, mech.omega_m + SWEEP_ABOVE, points)


def swept_sine_response(mech, optical, drive, bath, grid, signal_level_db=25.0, coherent_gain=1.0):
    """Normalized phase-modulation power seen by the network analyzer.

    Each grid point carries ``A(Omega) * S_sig + S_th(Omega) / coherent_gain``
    where ``S_sig`` sits ``signal_level_db`` above the bare-mode thermal
    noise at ``omega_m`` and ``S_th`` is the thermal noise of the probed
    (detuned) mode. The trace is divided by its value 1 kHz above
    ``omega_m`` (linear interpolation if that point is off-grid), so far
    from resonance it reads 1 and near it reads the amplification factor.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise GridError("sweep grid must be strictly increasing")
    if grid[0] > mech.omega_m - SWEEP_BELOW * (1 - 1e-12) or grid[-1] < mech.omega_m + SWEEP_ABOVE * (1 - 1e-12):
        raise GridError("sweep must cover omega_m - 500 Hz .. omega_m + 1.5 kHz")
    s_ref = thermal_psd(mech, optical, None, bath, mech.omega_m)
    s_sig = s_ref * 10.0 ** (signal_level_db / 10.0)
    amp = amplification_factor(mech, optical, drive, grid)
    floor = thermal_psd(mech, optical, drive, bath, grid) / coherent_gain
    raw = amp * s_sig + floor
    norm = np.interp(mech.omega_m + REFERENCE_OFFSET, grid, raw)
    return SpectrumTrace(grid, raw / norm, "amplification")
