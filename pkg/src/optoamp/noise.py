"""Quantum-limited measurement noise, expressed as equivalent length noise.

Two models are provided. The narrowband one holds for frequencies far below
the cavity bandwidth::

    S = 1/(4 xi^2) + hbar^2 xi^2 |chi_eff|^2 = hbar |chi_eff| (1/zeta + zeta) / 2

with ``zeta = 2 hbar xi^2 |chi_eff|``. The finite-bandwidth model keeps the
cavity filtering through the optical factors ``u`` and ``v``::

    S = hbar |chi_eff| [ (1/zeta + zeta)/2 + |v|^2 zeta / 2 + Im(conj(v) chi_eff/|chi_eff|) ]

with ``zeta = 2 hbar xi^2 |chi_eff| / |u|^2``. The sign of the cross term is
the one for which the correction stays within 1 dB wherever the signal is
amplified at the reference operating point; the opposite sign exceeds it.

All spectra are one-sided, in m^2/Hz, as functions of angular frequency.
A signal with spectrum ``S_sig`` reaches the detector multiplied by the
amplification factor, so the equivalent signal noise of an amplified
measurement is the quantum noise divided by that factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .errors import ModelValidityError, NegativeNoiseError, OffGridError, ZeroPowerError
from .params import CONSTANTS, derive_drive_state
from .response import _as_grid, _restore, backaction_gain, susceptibilities


@dataclass(frozen=True)
class QuantumNoiseBudget:
    shot: np.ndarray
    backaction: np.ndarray
    total: np.ndarray
    zeta: np.ndarray
    sql: np.ndarray


@dataclass(frozen=True)
class FiniteBandwidthFactors:
    u: complex
    v: complex


@dataclass(frozen=True)
class SensitivityCurve:
    """Equivalent signal noise (m^2/Hz) on an angular-frequency grid.

    ``sql_eff`` and ``sql_bare`` carry ``hbar |chi_eff|`` and ``hbar |chi|``
    on the same grid so that improvements can be read off directly.
    """

    grid: np.ndarray
    s_x_sig_equiv: np.ndarray
    amplified: bool
    finite_bandwidth: bool
    sql_eff: np.ndarray
    sql_bare: np.ndarray
    amplification: np.ndarray


def _require_power(drive):
    if drive.xi <= 0.0:
        raise ZeroPowerError("readout gain xi is zero (no probe power); zeta and shot noise are undefined")


def _evaluate(mech, optical, drive, grid):
    _require_power(drive)
    chi_b, chi_e = susceptibilities(mech, optical, drive, grid)
    out = kernels.quantum_noise(grid, chi_e, optical.gamma, optical.tau, drive.detuning, drive.xi, CONSTANTS.hbar)
    return chi_b, chi_e, out


def zeta(mech, optical, drive, omega, finite_bandwidth=False):
    """Optomechanical parameter balancing shot noise against back-action noise."""
    grid, shape = _as_grid(omega)
    _, _, (z_nb, _, z_fb, _, _) = _evaluate(mech, optical, drive, grid)
    return _restore(z_fb if finite_bandwidth else z_nb, shape)


def quantum_noise_narrowband(mech, optical, drive, omega):
    grid, shape = _as_grid(omega)
    _, _, (_, s_nb, _, _, _) = _evaluate(mech, optical, drive, grid)
    return _restore(s_nb, shape)


def noise_budget(mech, optical, drive, omega):
    """Shot / back-action decomposition of the narrowband noise."""
    grid = np.atleast_1d(np.asarray(omega, dtype=float))
    _, chi_e, (z_nb, s_nb, _, _, _) = _evaluate(mech, optical, drive, grid)
    hbar = CONSTANTS.hbar
    xi2 = drive.xi**2
    mag = np.abs(chi_e)
    shot = np.full_like(grid, 1.0 / (4.0 * xi2))
    return QuantumNoiseBudget(shot=shot, backaction=hbar**2 * xi2 * mag**2, total=s_nb, zeta=z_nb, sql=hbar * mag)


def finite_bandwidth_factors(optical, detuning_over_gamma, omega):
    gamma = optical.gamma
    psi = detuning_over_gamma * gamma
    wt = np.asarray(omega, dtype=float) * optical.tau
    dlt = (gamma - 1j * wt) ** 2 + psi * psi
    u = dlt / (gamma * gamma + psi * psi - 1j * gamma * wt)
    v = (wt / gamma) * (gamma * psi / dlt) * u
    if np.ndim(omega) == 0:
        return FiniteBandwidthFactors(complex(u), complex(v))
    return FiniteBandwidthFactors(u, v)


def quantum_noise_finite_bandwidth(mech, optical, drive, omega):
    grid, shape = _as_grid(omega)
    _, _, (_, _, _, s_fb, bracket) = _evaluate(mech, optical, drive, grid)
    if np.any(bracket <= 0) or np.any(~np.isfinite(bracket)):
        bad = grid[~(bracket > 0)]
        raise NegativeNoiseError(
            f"finite-bandwidth noise bracket non-positive at {bad.size} frequencies (first {bad[0]:.6g} rad/s)"
        )
    return _restore(s_fb, shape)


def sensitivity_curve(mech, optical, drive, grid, amplified=True, finite_bandwidth=True):
    """Equivalent signal noise giving unit signal-to-noise ratio."""
    grid = np.ascontiguousarray(grid, dtype=float)
    chi_b, chi_e, (_, s_nb, _, s_fb, bracket) = _evaluate(mech, optical, drive, grid)
    if finite_bandwidth:
        if np.any(~(bracket > 0)):
            raise NegativeNoiseError("finite-bandwidth noise bracket non-positive")
        noise = s_fb
    else:
        noise = s_nb
    amp = (chi_e.real**2 + chi_e.imag**2) / (chi_b.real**2 + chi_b.imag**2)
    values = noise / amp if amplified else noise.copy()
    hbar = CONSTANTS.hbar
    return SensitivityCurve(
        grid=grid,
        s_x_sig_equiv=values,
        amplified=bool(amplified),
        finite_bandwidth=bool(finite_bandwidth),
        sql_eff=hbar * np.abs(chi_e),
        sql_bare=hbar * np.abs(chi_b),
        amplification=amp,
    )


def improvement_db(curve, reference, omega):
    """``10 log10(reference / curve)`` at a grid frequency; positive beats the SQL.

    ``reference`` is ``"sql_eff"`` or ``"sql_bare"``; ``omega`` may be a
    scalar or an array of grid nodes.
    """
    if reference not in ("sql_eff", "sql_bare"):
        raise ValueError(f"unknown reference {reference!r}")
    ref = getattr(curve, reference)
    omega_arr, shape = _as_grid(omega)
    idx = np.searchsorted(curve.grid, omega_arr)
    idx = np.clip(idx, 0, curve.grid.size - 1)
    # accept the left neighbour too, to tolerate rounding in the caller's grid
    left = np.clip(idx - 1, 0, curve.grid.size - 1)
    pick = np.where(np.abs(curve.grid[left] - omega_arr) < np.abs(curve.grid[idx] - omega_arr), left, idx)
    tol = 1e-12 * np.maximum(np.abs(omega_arr), 1.0)
    if np.any(np.abs(curve.grid[pick] - omega_arr) > tol):
        raise OffGridError("frequency is not a node of the curve's grid")
    return _restore(10.0 * np.log10(ref[pick] / curve.s_x_sig_equiv[pick]), shape)


def best_improvement_db(curve, reference, window=None):
    """Largest improvement over the grid, optionally within ``(lo, hi)`` rad/s.

    Returns ``(dB, omega)``.
    """
    ref = getattr(curve, reference)
    db = 10.0 * np.log10(ref / curve.s_x_sig_equiv)
    mask = np.ones(curve.grid.size, bool)
    if window is not None:
        mask = (curve.grid >= window[0]) & (curve.grid <= window[1])
    i = np.flatnonzero(mask)[np.argmax(db[mask])]
    return float(db[i]), float(curve.grid[i])


def optimize_power(objective, p_range=(1e-4, 2e-2), points=200, rtol=0.01):
    """Maximize ``objective(P)`` over a log-spaced power grid, then refine locally.

    Returns ``(P_best, objective(P_best))``. Objective failures (model-validity
    errors) count as ``-inf``.
    """
    def safe(p):
        try:
            return float(objective(p))
        except ModelValidityError:
            return -math.inf

    logs = np.linspace(math.log(p_range[0]), math.log(p_range[1]), points)
    values = np.array([safe(math.exp(x)) for x in logs])
    i = int(np.argmax(values))
    lo, hi = logs[max(i - 1, 0)], logs[min(i + 1, points - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -safe(math.exp(x)), bounds=(lo, hi), method="bounded",
                              options={"xatol": rtol * 1e-2})
        if -res.fun > values[i]:
            return math.exp(res.x), -res.fun
    return math.exp(logs[i]), values[i]


def power_for_unit_zeta(mech, optical, detuning_over_gamma, omega):
    """Smallest input power (W) giving ``zeta = 1`` (narrowband) at ``omega``.

    With ``xi^2 = a P`` and ``chi_eff^-1 = c + b P`` the condition
    ``2 hbar a P = |c + b P|`` is a quadratic in ``P``, solved directly.
    Raises ``ValueError`` when it has no positive root: at large detuning
    the back-action stiffness grows as fast as the readout gain and
    ``zeta`` saturates below one.
    """
    unit = derive_drive_state(optical, 1.0, detuning_over_gamma)
    w = np.array([float(omega)])
    chi_inv, k_opt, _ = kernels.response(
        w, mech.mass, mech.omega_m, mech.q, optical.gamma, optical.tau, unit.detuning, backaction_gain(optical, unit)
    )
    a = 2.0 * CONSTANTS.hbar * unit.xi**2
    b, c = complex(k_opt[0]), complex(chi_inv[0])
    # (a^2 - |b|^2) P^2 - 2 Re(conj(c) b) P - |c|^2 = 0
    qa = a * a - abs(b) ** 2
    qb = -2.0 * (c.conjugate() * b).real
    qc = -abs(c) ** 2
    roots = []
    if qa == 0.0:
        if qb != 0.0:
            roots = [-qc / qb]
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc >= 0.0:
            # cancellation-free pair
            q = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
            roots = [q / qa] + ([qc / q] if q != 0.0 else [])
    positive = sorted(r for r in roots if r > 0 and math.isfinite(r))
    if not positive:
        raise ValueError("zeta = 1 is not reachable at any power for this detuning and frequency")
    return positive[0]
