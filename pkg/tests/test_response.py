import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optoamp.errors import GridError
from optoamp.params import CONSTANTS, MechanicalParams, derive_drive_state
from optoamp.response import (
    amplification_factor,
    backaction_coefficient,
    chi,
    chi_eff,
    effective_damping,
    effective_mode_params,
    instability_threshold_power,
    local_mode,
    mode_grid,
    resonance_grid,
)

HBAR = CONSTANTS.hbar


def _k_opt_oracle(optics, drive, omega):
    # straight transcription with python complex arithmetic
    g, tau, psi = optics.gamma, optics.tau, drive.detuning
    dlt = complex(g, -omega * tau) ** 2 + psi * psi
    return 8 * HBAR * optics.k**2 * drive.intensity * psi / dlt


def test_chi_static_is_real_compliance(mirror, backend):
    c0 = chi(mirror, 0.0)
    assert c0.imag == 0.0
    assert c0.real == pytest.approx(1 / (mirror.mass * mirror.omega_m**2), rel=1e-14)


def test_chi_on_resonance(mirror, backend):
    c = chi(mirror, mirror.omega_m)
    expect = 1j * mirror.q / (mirror.mass * mirror.omega_m**2)
    assert abs(c - expect) / abs(expect) < 1e-9
    assert abs(c) == pytest.approx(2.1e-4, rel=0.01)


def test_chi_half_width(mirror, backend):
    ratio = abs(chi(mirror, mirror.omega_m + 10 * mirror.gamma_m)) / abs(chi(mirror, mirror.omega_m))
    assert ratio == pytest.approx(1 / math.sqrt(401), rel=0.02)


def test_chi_passive(mirror, wide_grid, backend):
    c = chi(mirror, wide_grid)
    assert np.all(c.imag > 0)
    assert np.array_equal(chi(mirror, -wide_grid), np.conj(c))


def test_k_opt_spot_values(optics, drive, mirror, backend):
    k = backaction_coefficient(optics, drive, mirror.omega_m)
    assert k.real == pytest.approx(-6.5e4, rel=0.05)
    assert k.imag == pytest.approx(-1.2e4, rel=0.05)
    assert abs(k - _k_opt_oracle(optics, drive, mirror.omega_m)) < 1e-9 * abs(k)


def test_k_opt_trivial(optics, mirror, backend):
    w = mirror.omega_m + np.linspace(-100, 100, 11)
    assert np.all(backaction_coefficient(optics, derive_drive_state(optics, 4e-3, 0.0), w) == 0)
    assert np.all(backaction_coefficient(optics, derive_drive_state(optics, 0.0, -2.97), w) == 0)


def test_k_opt_sign_link(optics, mirror, backend):
    w = mirror.omega_m
    red = backaction_coefficient(optics, derive_drive_state(optics, 4e-3, -2.0), w)
    blue = backaction_coefficient(optics, derive_drive_state(optics, 4e-3, 2.0), w)
    assert np.sign(red.real) == -np.sign(blue.real)
    assert np.sign(red.imag) == -np.sign(blue.imag)
    assert red.real < 0 and red.imag < 0
    oracle = _k_opt_oracle(optics, derive_drive_state(optics, 4e-3, 2.0), w)
    assert abs(blue - oracle) < 1e-12 * abs(oracle)


@pytest.mark.parametrize("factor", [0.1, 0.5, 2.0, 10.0])
def test_k_opt_linear_in_power(optics, mirror, factor, backend):
    w = mirror.omega_m + np.linspace(-50, 50, 7)
    base = backaction_coefficient(optics, derive_drive_state(optics, 1e-3, -2.97), w)
    scaled = backaction_coefficient(optics, derive_drive_state(optics, factor * 1e-3, -2.97), w)
    np.testing.assert_allclose(scaled, factor * base, rtol=1e-12)


@pytest.mark.parametrize("power,detuning", [(0.0, -2.97), (4e-3, 0.0), (0.0, 0.0)])
def test_trivial_limits_bit_exact(optics, mirror, wide_grid, power, detuning, backend):
    d = derive_drive_state(optics, power, detuning)
    assert np.array_equal(chi_eff(mirror, optics, d, wide_grid), chi(mirror, wide_grid))
    assert np.all(amplification_factor(mirror, optics, d, wide_grid) == 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-4, 2e-2), st.floats(-5.0, 5.0), st.floats(1e6, 1e7))
def test_chi_eff_conjugate_symmetry(optics, mirror, power, detuning, omega):
    d = derive_drive_state(optics, power, detuning)
    w = np.array([omega, mirror.omega_m])
    np.testing.assert_allclose(chi_eff(mirror, optics, d, -w), np.conj(chi_eff(mirror, optics, d, w)), rtol=1e-12)


def test_amplification_matches_ratio(optics, drive, mirror, wide_grid, backend):
    ratio = chi_eff(mirror, optics, drive, wide_grid) / chi(mirror, wide_grid)
    np.testing.assert_allclose(amplification_factor(mirror, optics, drive, wide_grid), np.abs(ratio) ** 2, rtol=1e-12)


def test_amplification_far_from_resonance(optics, drive, mirror):
    w = mirror.omega_m + 2 * math.pi * 50e3 * np.array([-1.0, 1.0])
    assert np.all(np.abs(amplification_factor(mirror, optics, drive, w) - 1) < 0.05)


def test_attenuation_on_resonance(optics, drive, mirror):
    assert amplification_factor(mirror, optics, drive, mirror.omega_m) < 1


def test_effective_mode_dark_limit(optics, mirror, backend):
    d = derive_drive_state(optics, 0.0, -2.97)
    mode = effective_mode_params(mirror, optics, d, resonance_grid(mirror))
    expect = mirror.omega_m * math.sqrt(1 - 1 / (2 * mirror.q**2))
    assert abs(mode.omega_eff - expect) < mirror.gamma_m / 100
    assert mode.gamma_eff == pytest.approx(mirror.gamma_m, rel=1e-12)
    assert mode.stable


def test_effective_mode_against_reduction(optics, drive, mirror, backend):
    k = _k_opt_oracle(optics, drive, mirror.omega_m)
    w_oracle = mirror.omega_m + k.real / (2 * mirror.mass * mirror.omega_m)
    g_oracle = mirror.gamma_m - k.imag / (mirror.mass * mirror.omega_m)
    mode = effective_mode_params(mirror, optics, drive, mode_grid(mirror, optics, drive))
    shift = mode.omega_eff - mirror.omega_m
    assert shift == pytest.approx(w_oracle - mirror.omega_m, rel=0.1)
    assert shift / (2 * math.pi) == pytest.approx(-10, rel=0.1)
    assert mode.gamma_eff == pytest.approx(g_oracle, rel=0.1)
    assert mode.gamma_eff == pytest.approx(32, rel=0.1)
    assert mode.omega_eff < mirror.omega_m and mode.gamma_eff > mirror.gamma_m


def test_effective_mode_peak_is_grid_max(optics, drive, mirror, backend):
    grid = mode_grid(mirror, optics, drive, step=0.01)
    mode = effective_mode_params(mirror, optics, drive, grid)
    i = np.argmax(np.abs(chi_eff(mirror, optics, drive, grid)))
    assert abs(mode.omega_eff - grid[i]) <= grid[1] - grid[0]


def test_local_mode_agrees_with_grid(optics, drive, mirror):
    a = local_mode(mirror, optics, drive)
    b = effective_mode_params(mirror, optics, drive, mode_grid(mirror, optics, drive))
    assert abs(a.omega_eff - b.omega_eff) < b.gamma_eff / 20
    assert a.gamma_eff == pytest.approx(b.gamma_eff, rel=0.01)


def _bisect_threshold(mirror, optics, detuning):
    # oracle: sign of Gamma + optical damping at omega_m, by plain bisection
    def damping(p):
        d = derive_drive_state(optics, p, detuning)
        k = _k_opt_oracle(optics, d, mirror.omega_m)
        return mirror.gamma_m - k.imag / (mirror.mass * mirror.omega_m)

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if damping(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_blue_detuning_instability(optics, mirror, backend):
    p_th = instability_threshold_power(mirror, optics, 2.97)
    assert p_th == pytest.approx(_bisect_threshold(mirror, optics, 2.97), rel=1e-6)
    below = derive_drive_state(optics, 0.5 * p_th, 2.97)
    above = derive_drive_state(optics, 2.0 * p_th, 2.97)
    assert effective_mode_params(mirror, optics, below, mode_grid(mirror, optics, below)).stable
    unstable = effective_mode_params(mirror, optics, above, mode_grid(mirror, optics, above))
    assert not unstable.stable and unstable.gamma_eff < 0


def test_no_threshold_on_red_side(optics, mirror):
    assert instability_threshold_power(mirror, optics, -2.97) == math.inf
    assert instability_threshold_power(mirror, optics, 0.0) == math.inf


def test_effective_damping_dark(mirror):
    assert effective_damping(mirror, None, None) == pytest.approx(mirror.gamma_m, rel=1e-12)


def test_grid_checks(optics, drive, mirror):
    g = mirror.gamma_m
    with pytest.raises(GridError):
        effective_mode_params(mirror, optics, drive, mirror.omega_m + g * np.linspace(-10, 10, 2001))
    with pytest.raises(GridError):
        effective_mode_params(mirror, optics, drive, mirror.omega_m + g * np.linspace(-60, 60, 101))
    with pytest.raises(GridError):
        effective_mode_params(mirror, optics, drive, resonance_grid(mirror)[::-1])
    # peak pushed outside a valid but narrow grid
    strong = derive_drive_state(optics, 0.1, -2.97)
    with pytest.raises(GridError):
        effective_mode_params(mirror, optics, strong, resonance_grid(mirror))


def test_shifted_mode_keeps_damping(mirror):
    moved = mirror.shifted(2 * math.pi)
    assert moved.gamma_m == pytest.approx(mirror.gamma_m, rel=1e-12)
    assert moved.omega_m == mirror.omega_m + 2 * math.pi
    assert isinstance(moved, MechanicalParams)
