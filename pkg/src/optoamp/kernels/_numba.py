"""numba-compiled kernels; one fused loop per grid, no temporaries."""
import numpy as np
from numba import njit


@njit(cache=True)
def response(omega, mass, omega_m, q, gamma, tau, psi, k_coef):
    n = omega.shape[0]
    chi_inv = np.empty(n, dtype=np.complex128)
    k_opt = np.empty(n, dtype=np.complex128)
    eff_inv = np.empty(n, dtype=np.complex128)
    psi2 = psi * psi
    wm2 = omega_m * omega_m
    for i in range(n):
        w = omega[i]
        ci = mass * complex(wm2 - w * w, -(omega_m * w / q))
        a = complex(gamma, -(w * tau))
        ko = k_coef / (a * a + psi2)
        chi_inv[i] = ci
        k_opt[i] = ko
        eff_inv[i] = ci + ko
    return chi_inv, k_opt, eff_inv


@njit(cache=True)
def quantum_noise(omega, chi_eff, gamma, tau, psi, xi, hbar):
    n = omega.shape[0]
    zeta_nb = np.empty(n)
    noise_nb = np.empty(n)
    zeta_fb = np.empty(n)
    noise_fb = np.empty(n)
    bracket = np.empty(n)
    xi2 = xi * xi
    psi2 = psi * psi
    for i in range(n):
        w = omega[i]
        ce = chi_eff[i]
        mag = abs(ce)
        z = 2.0 * hbar * xi2 * mag
        zeta_nb[i] = z
        noise_nb[i] = 1.0 / (4.0 * xi2) + hbar * hbar * xi2 * mag * mag
        a = complex(gamma, -(w * tau))
        dlt = a * a + psi2
        u = dlt / complex(gamma * gamma + psi2, -(gamma * w * tau))
        v = (w * tau / gamma) * (gamma * psi / dlt) * u
        u2 = u.real * u.real + u.imag * u.imag
        zf = z / u2
        ph = ce / mag
        cross = v.real * ph.imag - v.imag * ph.real
        v2 = v.real * v.real + v.imag * v.imag
        b = 0.5 * (1.0 / zf + zf) + 0.5 * v2 * zf + cross
        zeta_fb[i] = zf
        bracket[i] = b
        noise_fb[i] = hbar * mag * b
    return zeta_nb, noise_nb, zeta_fb, noise_fb, bracket


@njit(cache=True)
def lorentzian(x, amp, center, width, base):
    h = 0.5 * width
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        d = x[i] - center
        out[i] = amp * h * h / (d * d + h * h) + base
    return out


@njit(cache=True)
def lorentzian_normal_equations(x, y, w, amp, center, width, base):
    h = 0.5 * width
    jtj = np.zeros((4, 4))
    jtr = np.zeros(4)
    g = np.empty(4)
    cost = 0.0
    for i in range(x.shape[0]):
        d = x[i] - center
        den = d * d + h * h
        shape = h * h / den
        r = y[i] - (amp * shape + base)
        g[0] = shape
        g[1] = amp * h * h * 2.0 * d / (den * den)
        g[2] = amp * h * d * d / (den * den)
        g[3] = 1.0
        wi = w[i]
        for a in range(4):
            ga = wi * g[a]
            jtr[a] += ga * r
            for b in range(4):
                jtj[a, b] += ga * g[b]
        cost += wi * r * r
    return jtj, jtr, cost
