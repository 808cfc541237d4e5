"""Time the numba and numpy kernel backends on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py [--points N] [--repeat R]``.
Reports the best-of-R wall time per call and the max relative difference
between backends. Numba timings exclude the first (compiling) call.
"""
import argparse
import timeit

import numpy as np

from optoamp import kernels
from optoamp.params import CONSTANTS, derive_drive_state, reference_mirror, reference_optics
from optoamp.response import backaction_gain


def _inputs(n):
    mech, opt = reference_mirror(), reference_optics()
    d = derive_drive_state(opt, 4e-3, -2.97)
    w = np.linspace(mech.omega_m - 2e4, mech.omega_m + 2e4, n)
    resp = (w, mech.mass, mech.omega_m, mech.q, opt.gamma, opt.tau, d.detuning, backaction_gain(opt, d))
    chi_e = 1.0 / kernels.numpy_backend.response(*resp)[2]
    noise = (w, chi_e, opt.gamma, opt.tau, d.detuning, d.xi, CONSTANTS.hbar)
    x = np.linspace(-50.0, 50.0, n)
    y = 3.0 / (1.0 + (x / 2.0) ** 2) + 0.1
    lor = (x, 2.9, 0.3, 4.2, 0.1)
    ne = (x, y, np.ones_like(x), 2.9, 0.3, 4.2, 0.1)
    return {"response": resp, "quantum_noise": noise, "lorentzian": lor, "lorentzian_normal_equations": ne}


def _max_rel(a, b):
    if isinstance(a, tuple):
        return max(_max_rel(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)
    if kernels.numba_backend is None:
        print("numba unavailable or disabled; timing numpy only")
    backends = {"numpy": kernels.numpy_backend, "numba": kernels.numba_backend}
    print(f"{'kernel':<30}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, call_args in _inputs(args.points).items():
        times, outs = {}, {}
        for label, mod in backends.items():
            if mod is None:
                continue
            fn = getattr(mod, name)
            outs[label] = fn(*call_args)  # warm-up / compile
            t = timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat)
            times[label] = 1e3 * min(t)
        nb = times.get("numba", float("nan"))
        diff = _max_rel(outs["numba"], outs["numpy"]) if "numba" in outs else float("nan")
        print(f"{name:<30}{times['numpy']:>12.3f}{nb:>12.3f}{times['numpy'] / nb:>10.2f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
