"""Damped Gauss-Newton (Levenberg-Marquardt) fit of a Lorentzian peak."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels

STEP_TOL = 1e-9
GRAD_TOL = 1e-12


@dataclass(frozen=True)
class FitResult:
    """Fitted ``amplitude * (width/2)^2 / ((x - center)^2 + (width/2)^2) + baseline``.

    ``center`` and ``width`` (full width at half maximum) are in the trace's
    frequency units, rad/s for :class:`~optoamp.traces.SpectrumTrace`.
    ``residual_norm`` is ``|y - model| / |y|``; ``stderr`` holds the standard
    errors of (center, width, amplitude, baseline).
    """

    center: float
    width: float
    amplitude: float
    baseline: float
    residual_norm: float
    converged: bool
    iterations: int
    stderr: tuple = (np.nan, np.nan, np.nan, np.nan)


def guess_peak(x, y):
    """Rough ``(center, width)`` from a lightly smoothed copy of the data."""
    k = max(1, min(9, x.size // 50))
    ys = np.convolve(y, np.ones(k) / k, mode="same")
    i = int(np.argmax(ys))
    floor = np.percentile(ys, 10)
    half = floor + 0.5 * (ys[i] - floor)
    lo = i
    while lo > 0 and ys[lo] > half:
        lo -= 1
    hi = i
    while hi < ys.size - 1 and ys[hi] > half:
        hi += 1
    width = max(x[hi] - x[lo], 2 * np.median(np.diff(x)))
    return float(x[i]), float(width)


def fit_lorentzian(trace, initial_guess=None, weights=None, max_iter=200, relative_noise=False):
    """Least-squares Lorentzian fit of ``trace``.

    Parameters
    ----------
    trace : SpectrumTrace
    initial_guess : (center, width), optional
        Starting point in rad/s; estimated from the data when omitted.
    weights : array, optional
        Per-point least-squares weights (inverse variances).
    max_iter : int
        Iteration cap; on exhaustion the best iterate is returned with
        ``converged=False``.
    relative_noise : bool
        Treat the scatter as proportional to the signal, as for averaged
        periodograms: the fit is repeated with weights ``1 / model**2``
        from the previous pass. Ignored when ``weights`` is given.
    """
    if relative_noise and weights is None:
        res = _fit(trace, initial_guess, None, max_iter)
        for _ in range(3):
            if not np.isfinite(res.width) or res.width <= 0:
                break
            model = kernels.lorentzian(
                np.asarray(trace.omega, float), res.amplitude, res.center, res.width, res.baseline
            )
            if np.any(model <= 0):
                break
            res = _fit(trace, (res.center, res.width), 1.0 / model**2, max_iter)
        return res
    return _fit(trace, initial_guess, weights, max_iter)


def _fit(trace, initial_guess, weights, max_iter):
    x_raw = np.asarray(trace.omega, dtype=float)
    y_raw = np.asarray(trace.values, dtype=float)
    if initial_guess is None:
        initial_guess = guess_peak(x_raw, y_raw)
    c0, w0 = float(initial_guess[0]), abs(float(initial_guess[1]))
    yscale = float(np.max(np.abs(y_raw))) or 1.0

    # work in units of the guessed width around the guessed centre
    x = (x_raw - c0) / w0
    y = y_raw / yscale
    w = np.ones_like(x) if weights is None else np.asarray(weights, float) * yscale**2
    w = w / np.mean(w)

    base = float(np.percentile(y, 10))
    i0 = int(np.argmin(np.abs(x)))
    p = np.array([y[i0] - base, 0.0, 1.0, base])
    lam = 1e-3
    jtj, jtr, cost = kernels.lorentzian_normal_equations(x, y, w, *p)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(jtr)) < GRAD_TOL:
            converged = True
            break
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0
        try:
            step = np.linalg.solve(jtj + lam * np.diag(diag), jtr)
        except np.linalg.LinAlgError:
            break
        trial = p + step
        trial[2] = abs(trial[2])
        rel = np.max(np.abs(step) / (np.abs(p) + 1e-12))
        t_jtj, t_jtr, t_cost = kernels.lorentzian_normal_equations(x, y, w, *trial)
        if np.isfinite(t_cost) and t_cost <= cost:
            p, jtj, jtr, cost = trial, t_jtj, t_jtr, t_cost
            lam = max(lam / 3.0, 1e-12)
            if rel < STEP_TOL:
                converged = True
                break
        else:
            if rel < STEP_TOL:
                converged = True
                break
            lam *= 4.0
            if lam > 1e16:
                break

    amp, center, width, baseline = p
    model = kernels.lorentzian(x, amp, center, width, baseline)
    ynorm = float(np.linalg.norm(y)) or 1.0
    residual = float(np.linalg.norm(y - model) / ynorm)

    stderr = (np.nan,) * 4
    dof = max(x.size - 4, 1)
    try:
        cov = np.linalg.inv(jtj) * (cost / dof)
        stderr = tuple(np.sqrt(np.abs(np.diag(cov))))
    except np.linalg.LinAlgError:
        converged = False
    # a fit is only meaningful if it found a resolved peak inside the data
    if converged:
        span = x[-1] - x[0]
        amp_err = stderr[0]
        floor = 1e-12
        if not (
            np.all(np.isfinite(p))
            and amp > floor
            and width > 0
            and width < span
            and x[0] <= center <= x[-1]
            and amp > 5.0 * amp_err
        ):
            converged = False

    return FitResult(
        center=float(c0 + center * w0),
        width=float(width * w0),
        amplitude=float(amp * yscale),
        baseline=float(baseline * yscale),
        residual_norm=residual,
        converged=bool(converged),
        iterations=it,
        stderr=(float(stderr[1] * w0), float(stderr[2] * w0), float(stderr[0] * yscale), float(stderr[3] * yscale)),
    )
