"""Sampled spectra with unit metadata."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectrumTrace:
    """Real-valued samples on an angular-frequency grid (rad/s).

    ``unit`` is the unit of ``values`` as it should appear in CSV column
    names, e.g. ``"m2_per_hz"``; an empty string marks a dimensionless trace.
    """

    omega: np.ndarray
    values: np.ndarray
    name: str
    unit: str = ""

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.shape != values.shape or omega.ndim != 1:
            raise ValueError("omega and values must be 1-D arrays of equal length")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    @property
    def frequency_hz(self):
        return self.omega / (2.0 * math.pi)

    @property
    def column(self):
        return f"{self.name}_{self.unit}" if self.unit else self.name

    def at(self, omega):
        """Linear interpolation of the trace at ``omega``."""
        return float(np.interp(omega, self.omega, self.values))

    def __len__(self):
        return self.omega.size
