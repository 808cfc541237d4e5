"""Vectorized numpy kernels. Reference path and fallback when numba is off."""
import numpy as np


def response(omega, mass, omega_m, q, gamma, tau, psi, k_coef):
    chi_inv = mass * (omega_m * omega_m - omega * omega - 1j * (omega_m * omega / q))
    dlt = (gamma - 1j * (omega * tau)) ** 2 + psi * psi
    k_opt = k_coef / dlt
    return chi_inv, k_opt, chi_inv + k_opt


def quantum_noise(omega, chi_eff, gamma, tau, psi, xi, hbar):
    mag = np.abs(chi_eff)
    xi2 = xi * xi
    zeta_nb = 2.0 * hbar * xi2 * mag
    noise_nb = 1.0 / (4.0 * xi2) + hbar * hbar * xi2 * mag * mag
    dlt = (gamma - 1j * (omega * tau)) ** 2 + psi * psi
    u = dlt / (gamma * gamma + psi * psi - 1j * (gamma * omega * tau))
    v = (omega * tau / gamma) * (gamma * psi / dlt) * u
    u2 = u.real * u.real + u.imag * u.imag
    zeta_fb = zeta_nb / u2
    phase = chi_eff / mag
    cross = v.real * phase.imag - v.imag * phase.real
    v2 = v.real * v.real + v.imag * v.imag
    bracket = 0.5 * (1.0 / zeta_fb + zeta_fb) + 0.5 * v2 * zeta_fb + cross
    noise_fb = hbar * mag * bracket
    return zeta_nb, noise_nb, zeta_fb, noise_fb, bracket


def lorentzian(x, amp, center, width, base):
    h = 0.5 * width
    d = x - center
    return amp * h * h / (d * d + h * h) + base


def lorentzian_normal_equations(x, y, w, amp, center, width, base):
    h = 0.5 * width
    d = x - center
    den = d * d + h * h
    shape = h * h / den
    r = y - (amp * shape + base)
    jac = np.empty((x.size, 4))
    jac[:, 0] = shape
    jac[:, 1] = amp * h * h * 2.0 * d / (den * den)
    jac[:, 2] = amp * h * d * d / (den * den)
    jac[:, 3] = 1.0
    jw = jac * w[:, None]
    return jw.T @ jac, jw.T @ r, float(np.sum(w * r * r))
