"""Hot numeric kernels with a selectable backend.

The numba backend is used when numba imports cleanly and the environment
variable ``OPTOAMP_DISABLE_NUMBA`` is unset or ``0``. Both backends expose
the same functions over 1-D float64 arrays; the public modules never call a
backend directly except through this namespace.
"""
import os

from . import _numpy

numpy_backend = _numpy

try:
    if os.environ.get("OPTOAMP_DISABLE_NUMBA", "0") not in ("", "0"):
        raise ImportError("numba disabled by OPTOAMP_DISABLE_NUMBA")
    from . import _numba
except ImportError:
    numba_backend = None
    backend = _numpy
    BACKEND = "numpy"
else:
    numba_backend = _numba
    backend = _numba
    BACKEND = "numba"

response = backend.response
quantum_noise = backend.quantum_noise
lorentzian = backend.lorentzian
lorentzian_normal_equations = backend.lorentzian_normal_equations

__all__ = [
    "BACKEND",
    "backend",
    "numba_backend",
    "numpy_backend",
    "response",
    "quantum_noise",
    "lorentzian",
    "lorentzian_normal_equations",
]
