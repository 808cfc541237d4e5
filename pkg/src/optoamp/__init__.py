"""Radiation-pressure back-action amplification in a detuned optomechanical cavity."""
from .errors import (
    ConfigError,
    InstabilityError,
    ModelValidityError,
    OptoampError,
    ParameterDomainError,
    SingularResponseError,
    ZeroPowerError,
)
from .kernels import BACKEND
from .noise import (
    improvement_db,
    quantum_noise_finite_bandwidth,
    quantum_noise_narrowband,
    sensitivity_curve,
    zeta,
)
from .params import (
    CONSTANTS,
    DriveState,
    MechanicalParams,
    OpticalParams,
    delta,
    derive_drive_state,
    derive_optical_params,
    reference_mirror,
    reference_optics,
)
from .response import amplification_factor, backaction_coefficient, chi, chi_eff, effective_mode_params

__version__ = "0.1.0"
