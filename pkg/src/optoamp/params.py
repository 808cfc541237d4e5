"""Physical constants and parameter records for a single-port detuned cavity.

Everything is SI with angular frequencies in rad/s. User-facing frequencies
(Hz) are converted at the boundary by the ``from_hz`` helpers.

Detuning convention
-------------------
The mean detuning ``psi`` is the round-trip phase offset of the laser from
cavity resonance and is always supplied in units of the cavity damping rate
``gamma``. Negative values are red detuning: the radiation-pressure force
then softens the mirror (resonance pulled below ``omega_m``) and adds
damping. This sign is fixed by that requirement, together with the choice
``delta = (gamma - i*Omega*tau)**2 + psi**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.constants

from .errors import ModelValidityError, ParameterDomainError

#: Upper bound on the cavity damping rate for the single-mode linearized model.
GAMMA_MAX = 0.01


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = field(default=scipy.constants.hbar, init=False)
    c: float = field(default=scipy.constants.c, init=False)
    kB: float = field(default=scipy.constants.k, init=False)


CONSTANTS = PhysicalConstants()


def _require_positive(**values):
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise ParameterDomainError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class OpticalParams:
    """Cavity geometry and the optical rates derived from it.

    Attributes
    ----------
    length, finesse, wavelength
        Cavity length (m), finesse, laser wavelength (m).
    gamma
        Cavity damping rate per round trip, ``pi / finesse``.
    tau
        Round-trip time ``2 L / c`` (s).
    omega_cav
        Cavity bandwidth ``gamma / tau`` (rad/s).
    k
        Wavevector ``2 pi / wavelength`` (rad/m).
    """

    length: float
    finesse: float
    wavelength: float
    gamma: float = field(init=False)
    tau: float = field(init=False)
    omega_cav: float = field(init=False)
    k: float = field(init=False)

    def __post_init__(self):
        _require_positive(length=self.length, finesse=self.finesse, wavelength=self.wavelength)
        gamma = math.pi / self.finesse
        if gamma >= GAMMA_MAX:
            raise ModelValidityError(
                f"gamma = pi/F = {gamma:.3g} is not small compared to unity "
                f"(need < {GAMMA_MAX}; finesse {self.finesse} too low)"
            )
        tau = 2.0 * self.length / CONSTANTS.c
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "omega_cav", gamma / tau)
        object.__setattr__(self, "k", 2.0 * math.pi / self.wavelength)

    @property
    def optical_frequency(self):
        """Laser angular frequency ``omega_L = c k`` (rad/s)."""
        return CONSTANTS.c * self.k


@dataclass(frozen=True)
class MechanicalParams:
    """Single mirror mode: resonance ``omega_m`` (rad/s), mass (kg), quality factor."""

    omega_m: float
    mass: float
    q: float
    gamma_m: float = field(init=False)

    def __post_init__(self):
        _require_positive(omega_m=self.omega_m, mass=self.mass, q=self.q)
        if self.q <= 1:
            raise ParameterDomainError(f"Q must be > 1, got {self.q!r}")
        object.__setattr__(self, "gamma_m", self.omega_m / self.q)

    @classmethod
    def from_hz(cls, f_m, mass, q):
        return cls(2.0 * math.pi * f_m, mass, q)

    def shifted(self, d_omega):
        """Same mode moved by ``d_omega`` rad/s at fixed damping rate."""
        omega = self.omega_m + d_omega
        return MechanicalParams(omega, self.mass, omega / self.gamma_m)


@dataclass(frozen=True)
class DriveState:
    """Probe beam: input power and detuning, plus the mean-field quantities.

    ``intensity`` is the mean intracavity photon flux ``|a|^2`` and
    ``photon_flux`` the incident one, both in photons/s. ``xi`` is the
    phase-readout gain in 1/(m s^1/2).
    """

    power: float
    detuning_over_gamma: float
    detuning: float
    photon_flux: float
    intensity: float
    xi: float

    @property
    def is_dark(self):
        return self.power == 0.0


def derive_optical_params(length, finesse, wavelength):
    """Build :class:`OpticalParams` from cavity length, finesse and wavelength."""
    return OpticalParams(length, finesse, wavelength)


def derive_drive_state(optical, power, detuning_over_gamma):
    """Mean-field state of the probe beam for ``power`` (W) at ``detuning_over_gamma``."""
    if not np.isfinite(power) or power < 0:
        raise ParameterDomainError(f"input power must be >= 0, got {power!r}")
    if not np.isfinite(detuning_over_gamma):
        raise ParameterDomainError("detuning must be finite")
    gamma = optical.gamma
    psi = detuning_over_gamma * gamma
    photon_energy = CONSTANTS.hbar * optical.optical_frequency
    flux = power / photon_energy
    denom = gamma * gamma + psi * psi
    intensity = 2.0 * gamma * flux / denom
    xi = 4.0 * optical.k * gamma * math.sqrt(flux) / denom
    return DriveState(
        power=float(power),
        detuning_over_gamma=float(detuning_over_gamma),
        detuning=psi,
        photon_flux=flux,
        intensity=intensity,
        xi=xi,
    )


def delta(optical, detuning_over_gamma, omega):
    """Cavity filter denominator ``(gamma - i Omega tau)^2 + psi^2``."""
    psi = detuning_over_gamma * optical.gamma
    omega = np.asarray(omega, dtype=float)
    return (optical.gamma - 1j * omega * optical.tau) ** 2 + psi * psi


# Reference configuration of the experiment this package reproduces.
REFERENCE_OPTICS = dict(length=500e-6, finesse=110_000.0, wavelength=810e-9)
REFERENCE_MIRROR = dict(f_m=1128.5e3, mass=72e-6, q=760_000.0)
REFERENCE_POWER = 4e-3
REFERENCE_DETUNINGS = (-1.87, -2.03, -2.97, -3.64)


def reference_optics():
    return derive_optical_params(**REFERENCE_OPTICS)


def reference_mirror():
    return MechanicalParams.from_hz(**REFERENCE_MIRROR)
