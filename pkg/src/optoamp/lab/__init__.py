"""Emulated measurement chain: thermal noise, estimation, fitting, protocol."""
from .fitting import FitResult, fit_lorentzian
from .network import default_sweep_grid, swept_sine_response
from .protocol import ExperimentRecord, ProtocolSettings, run_protocol, run_protocol_params
from .synthesis import synthesize_timeseries
from .thermal import BathParams, ThermalNoiseModel, local_mode, thermal_psd
from .welch import emulate_welch, periodogram, welch_dof, welch_duration

__all__ = [
    "BathParams",
    "ExperimentRecord",
    "FitResult",
    "ProtocolSettings",
    "ThermalNoiseModel",
    "default_sweep_grid",
    "emulate_welch",
    "fit_lorentzian",
    "local_mode",
    "periodogram",
    "run_protocol",
    "run_protocol_params",
    "swept_sine_response",
    "synthesize_timeseries",
    "thermal_psd",
    "welch_dof",
    "welch_duration",
]
