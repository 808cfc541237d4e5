"""Deterministic CSV and key-value output with atomic writes."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

FLOAT_FORMAT = ".12g"


def _fmt(x):
    return format(float(x), FLOAT_FORMAT)


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def write_csv(traces, path):
    """Write one or more :class:`SpectrumTrace` sharing a grid to ``path``.

    The first column is ``frequency_hz``; each trace contributes one column
    named after :attr:`SpectrumTrace.column`.
    """
    if not isinstance(traces, (list, tuple)):
        traces = [traces]
    if not traces:
        raise ValueError("no traces to write")
    grid = traces[0].omega
    for tr in traces[1:]:
        if tr.omega.shape != grid.shape or not np.array_equal(tr.omega, grid):
            raise ValueError(f"trace {tr.name!r} does not share the grid of {traces[0].name!r}")
    lines = [",".join(["frequency_hz"] + [tr.column for tr in traces])]
    freq = traces[0].frequency_hz
    cols = [tr.values for tr in traces]
    for i in range(freq.size):
        lines.append(",".join([_fmt(freq[i])] + [_fmt(c[i]) for c in cols]))
    try:
        return atomic_write_text(path, "\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path):
    """Read a file produced by :func:`write_csv` into ``(header, array)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_summary(mapping, path):
    """Flat ``key = value`` file, keys in insertion order."""
    lines = []
    for key, value in mapping.items():
        if isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{key} = {value}")
    return atomic_write_text(path, "\n".join(lines) + "\n")
