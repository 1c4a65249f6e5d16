"""Readers for the simulator's on-disk formats.

Everything here works from the files alone: the fixed CSV column set,
the sweep summary JSON and the two-header snapshot text format. Inputs
are opened read-only and never modified.
"""

import json
import os

import numpy as np

CSV_COLUMNS = [
    "t", "F", "E_total", "mass_phi", "mass_total",
    "diss_mu", "diss_theta", "diss_u", "q_work",
    "disc_plus", "disc_ratio", "mmW11", "mu_ratio",
    "perimeter", "varifold_mass", "energy_residual",
]

# transition-layer energy constant 4*sqrt(2)/3 of the quartic well
SIGMA = 4.0 * np.sqrt(2.0) / 3.0


class InputError(Exception):
    """Bad or missing input file; carries path and line for the CLI."""

    def __init__(self, path, message, line=None):
        self.path = path
        self.line = line
        self.message = message
        where = "%s:%d" % (path, line) if line is not None else str(path)
        super().__init__("%s: %s" % (where, message))


def read_series(path):
    """Parse a scalar-series CSV into {column: float array}."""
    try:
        with open(path, "r") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(path, str(exc)) from exc
    if not lines:
        raise InputError(path, "empty file", line=1)
    header = lines[0].split(",")
    if header != CSV_COLUMNS:
        raise InputError(path, "unexpected CSV header %r" % lines[0], line=1)
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise InputError(path, "expected %d fields, got %d"
                             % (len(CSV_COLUMNS), len(parts)), line=k)
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise InputError(path, str(exc), line=k) from exc
    if not rows:
        raise InputError(path, "no data rows", line=2)
    data = np.array(rows)
    return {c: data[:, j] for j, c in enumerate(CSV_COLUMNS)}


def read_summary(path):
    """Parse a sweep summary JSON and check the expected shape."""
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(path, str(exc)) from exc
    try:
        summary = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(path, exc.msg, line=exc.lineno) from exc
    for key in ("epsilons", "rows", "verdicts"):
        if key not in summary:
            raise InputError(path, "summary is missing %r" % key)
    if len(summary["rows"]) != len(summary["epsilons"]):
        raise InputError(path, "rows/epsilons length mismatch")
    return summary


def snapshot_time(path):
    """Time encoded in a snapshot filename, or None."""
    stem = os.path.splitext(os.path.basename(path))[0]
    if "_t=" not in stem:
        return None
    try:
        return float(stem.rsplit("_t=", 1)[1])
    except ValueError:
        return None


def read_snapshot(path):
    """Parse a snapshot file.

    Returns (backend, t, surface, u) where surface maps the field names
    phi/v/mu/theta to arrays and t comes from the filename (or None).
    """
    try:
        with open(path, "r") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(path, str(exc)) from exc
    if not lines or lines[0] != "RAFTSNAP 1":
        raise InputError(path, "not a RAFTSNAP 1 file", line=1)
    if len(lines) < 2:
        raise InputError(path, "missing size header", line=2)
    head = lines[1].split()
    if len(head) != 3:
        raise InputError(path, "size header needs backend n_s n_b", line=2)
    backend = head[0]
    if backend not in ("circle", "sphere"):
        raise InputError(path, "unknown backend %r" % backend, line=2)
    try:
        n_s, n_b = int(head[1]), int(head[2])
    except ValueError as exc:
        raise InputError(path, str(exc), line=2) from exc
    need = 2 + n_s + n_b
    if len(lines) < need:
        raise InputError(path, "expected %d lines, got %d"
                         % (need, len(lines)), line=len(lines))

    surf = np.empty((n_s, 4))
    for i in range(n_s):
        k = 2 + i
        parts = lines[k].split()
        if len(parts) != 5:
            raise InputError(path, "surface row needs 5 fields", line=k + 1)
        if int(parts[0]) != i:
            raise InputError(path, "surface index out of order", line=k + 1)
        surf[i] = [float(p) for p in parts[1:]]
    u = np.empty(n_b)
    for i in range(n_b):
        k = 2 + n_s + i
        parts = lines[k].split()
        if len(parts) != 2:
            raise InputError(path, "bulk row needs 2 fields", line=k + 1)
        if int(parts[0]) != i:
            raise InputError(path, "bulk index out of order", line=k + 1)
        u[i] = float(parts[1])

    fields = {name: surf[:, j].copy()
              for j, name in enumerate(("phi", "v", "mu", "theta"))}
    return backend, snapshot_time(path), fields, u
