"""Bare and effective mechanical susceptibilities and the signal amplification.

The radiation-pressure force driven by a length change ``X`` is
``-K_opt(Omega) X`` with ``K_opt = 8 hbar k^2 I psi / delta(Omega)``. The same
coefficient acts on mirror motion (dynamical back-action, which turns ``chi``
into ``chi_eff``) and on a cavity-length signal, which is why the measured
signal is rescaled by ``|chi_eff / chi|^2``.

Sign calibration: with ``delta = (gamma - i Omega tau)^2 + psi^2`` a negative
(red) detuning gives ``Re K_opt < 0`` (softening, resonance pulled down) and
``Im K_opt < 0`` (extra damping). Blue detuning flips both and can drive the
effective damping through zero; that parametric instability is reported via
:attr:`EffectiveModeParams.stable` rather than simulated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import GridError, SingularResponseError
from .params import CONSTANTS, derive_drive_state

# |chi_eff^-1| below this (N/m) is treated as a singular inverse.
_SINGULAR_FLOOR = 1e-300


@dataclass(frozen=True)
class EffectiveModeParams:
    omega_eff: float
    gamma_eff: float
    stable: bool


def _as_grid(omega):
    arr = np.asarray(omega, dtype=float)
    return np.atleast_1d(arr).ravel(), arr.shape


def _restore(values, shape):
    if shape == ():
        return values[0]
    return values.reshape(shape)


def backaction_gain(optical, drive):
    """Numerator ``8 hbar k^2 I psi`` of the back-action coefficient (N/m)."""
    return 8.0 * CONSTANTS.hbar * optical.k**2 * drive.intensity * drive.detuning


def _inverses(mech, optical, drive, omega):
    k_coef = 0.0 if drive is None else backaction_gain(optical, drive)
    psi = 0.0 if drive is None else drive.detuning
    gamma = 1.0 if optical is None else optical.gamma
    tau = 0.0 if optical is None else optical.tau
    return kernels.response(omega, mech.mass, mech.omega_m, mech.q, gamma, tau, psi, k_coef)


def chi(mech, omega):
    """Lorentzian susceptibility ``1 / (M (Omega_M^2 - Omega^2 - i Omega_M Omega / Q))`` in m/N."""
    grid, shape = _as_grid(omega)
    chi_inv, _, _ = _inverses(mech, None, None, grid)
    return _restore(1.0 / chi_inv, shape)


def backaction_coefficient(optical, drive, omega):
    """Complex optical spring ``K_opt(Omega)`` in N/m."""
    grid, shape = _as_grid(omega)
    # mechanical part is irrelevant here; any valid mode works
    _, k_opt, _ = kernels.response(
        grid, 1.0, 1.0, 2.0, optical.gamma, optical.tau, drive.detuning, backaction_gain(optical, drive)
    )
    return _restore(k_opt, shape)


def susceptibilities(mech, optical, drive, omega):
    """Return ``(chi, chi_eff)`` on a 1-D grid from a single kernel call."""
    grid = np.ascontiguousarray(omega, dtype=float)
    chi_inv, _, eff_inv = _inverses(mech, optical, drive, grid)
    _check_singular(eff_inv)
    return 1.0 / chi_inv, 1.0 / eff_inv


def _check_singular(eff_inv):
    mag = np.abs(eff_inv)
    if np.any(~np.isfinite(mag)) or np.any(mag < _SINGULAR_FLOOR):
        raise SingularResponseError("inverse effective susceptibility vanished (instability boundary)")


def chi_eff(mech, optical, drive, omega):
    """Effective susceptibility, computed as ``1 / (chi^-1 + K_opt)``."""
    grid, shape = _as_grid(omega)
    _, _, eff_inv = _inverses(mech, optical, drive, grid)
    _check_singular(eff_inv)
    return _restore(1.0 / eff_inv, shape)


def amplification_factor(mech, optical, drive, omega):
    """Signal amplification ``|chi_eff / chi|^2``."""
    grid, shape = _as_grid(omega)
    chi_inv, _, eff_inv = _inverses(mech, optical, drive, grid)
    _check_singular(eff_inv)
    # ratio of squared moduli: exactly 1 when the inverses coincide
    num = chi_inv.real**2 + chi_inv.imag**2
    den = eff_inv.real**2 + eff_inv.imag**2
    return _restore(num / den, shape)


def effective_damping(mech, optical, drive, omega=None):
    """Local damping ``-Im chi_eff^-1 / (M Omega)`` at ``omega`` (default ``omega_m``)."""
    w = mech.omega_m if omega is None else float(omega)
    _, _, eff_inv = _inverses(mech, optical, drive, np.array([w]))
    return float(-eff_inv[0].imag / (mech.mass * w))


def check_grid(mech, grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise GridError("grid must be a strictly increasing 1-D array with at least 3 points")
    g = mech.gamma_m
    if grid[0] > mech.omega_m - 50 * g or grid[-1] < mech.omega_m + 50 * g:
        raise GridError("grid must span at least omega_m +/- 50 Gamma")
    if np.max(np.diff(grid)) > g / 10 * (1 + 1e-9):
        raise GridError(f"grid step exceeds Gamma/10 = {g / 10:.4g} rad/s")
    return grid


def resonance_grid(mech, half_span=50.0, step=0.1, lo=None, hi=None):
    """Uniform grid around ``omega_m``; span and step in units of ``gamma_m``.

    ``lo`` and ``hi`` override the span (also in units of ``gamma_m``,
    relative to ``omega_m``).
    """
    g = mech.gamma_m
    lo = -half_span if lo is None else lo
    hi = half_span if hi is None else hi
    n = int(math.ceil((hi - lo) / step)) + 1
    return mech.omega_m + g * np.linspace(lo, hi, n)


def effective_mode_params(mech, optical, drive, grid):
    """Locate the effective resonance and its damping.

    The resonance is the maximum of ``|chi_eff|`` on ``grid``, refined by a
    3-point parabola; the damping is the local ``-i Omega`` coefficient of
    ``chi_eff^-1`` at that frequency.
    """
    grid = check_grid(mech, grid)
    _, _, eff_inv = _inverses(mech, optical, drive, grid)
    _check_singular(eff_inv)
    # log|chi_eff| is close to a parabola at the peak
    level = -np.log(np.abs(eff_inv))
    i = int(np.argmax(level))
    if i == 0 or i == grid.size - 1:
        raise GridError("peak of |chi_eff| is not bracketed by the grid")
    # parabola through the three nodes, in offsets from the middle one
    d0, d2 = grid[i - 1] - grid[i], grid[i + 1] - grid[i]
    s0, s2 = level[i - 1] - level[i], level[i + 1] - level[i]
    a = (s0 / d0 - s2 / d2) / (d0 - d2)
    b = s0 / d0 - a * d0
    offset = -b / (2 * a) if a < 0 else 0.0
    if not (d0 <= offset <= d2):
        offset = 0.0
    omega_eff = grid[i] + offset
    gamma_eff = effective_damping(mech, optical, drive, omega_eff)
    return EffectiveModeParams(float(omega_eff), gamma_eff, gamma_eff > 0)


def local_mode(mech, optical=None, drive=None):
    """Effective resonance and damping from the local oscillator reduction.

    Cheap alternative to :func:`effective_mode_params`
    that needs no grid: the optical spring is evaluated at ``omega_m`` and
    once more at the shifted resonance.
    """
    if drive is None or drive.intensity == 0.0 or drive.detuning == 0.0:
        return EffectiveModeParams(mech.omega_m, mech.gamma_m, True)
    omega = mech.omega_m
    for _ in range(2):
        k_re = backaction_coefficient(optical, drive, omega).real
        omega = math.sqrt(max(mech.omega_m**2 + k_re / mech.mass, 0.0))
    gamma = effective_damping(mech, optical, drive, omega)
    return EffectiveModeParams(omega, gamma, gamma > 0)


def mode_grid(mech, optical=None, drive=None, step=0.1):
    """Grid valid for :func:`effective_mode_params` that also brackets the shifted peak."""
    mode = local_mode(mech, optical, drive)
    g = mech.gamma_m
    shift = (mode.omega_eff - mech.omega_m) / g
    half = 50.0 * max(abs(mode.gamma_eff), g) / g
    return resonance_grid(mech, lo=min(-50.0, shift - half), hi=max(50.0, shift + half), step=step)


def instability_threshold_power(mech, optical, detuning_over_gamma, p_max=1.0):
    """Input power (W) at which the effective damping at ``omega_m`` reaches zero.

    Returns ``inf`` when back-action only adds damping (red or zero detuning)
    or when the threshold exceeds ``p_max``.
    """

    def damping(p):
        return effective_damping(mech, optical, derive_drive_state(optical, p, detuning_over_gamma))

    if damping(p_max) > 0:
        return math.inf
    return brentq(damping, 0.0, p_max, xtol=1e-15, rtol=1e-12)
