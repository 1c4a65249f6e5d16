"""Bit-specified file formats: time-series CSV, ASCII snapshots, JSON
summaries.

Every float is printed with 17 significant digits, which round-trips
IEEE doubles exactly, so re-reading and recomputing reproduces values
bitwise. Nothing wall-clock dependent is ever written.
"""

import json

import numpy as np

from ..diagnostics import CSV_COLUMNS, record_state
from ..errors import InvalidArgumentError
from ..model import PhaseState

SNAPSHOT_MAGIC = "RAFTSNAP 1"


def _fmt(x):
    return "%.17g" % x


def write_csv(path, records):
    """Write DiagnosticsRecord rows under the fixed 16-column header."""
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(x) for x in rec.as_row()))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read a time-series CSV back as (columns, float array)."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines:
        raise InvalidArgumentError("%s: empty CSV" % path)
    cols = lines[0].split(",")
    if cols != CSV_COLUMNS:
        raise InvalidArgumentError(
            "%s: unexpected CSV header %r" % (path, lines[0]))
    data = np.array([[float(x) for x in ln.split(",")]
                     for ln in lines[1:]], dtype=float)
    return cols, data.reshape(-1, len(cols))


def snapshot_filename(index, t):
    """Index orders the files; the time token round-trips exactly."""
    return "snap_%04d_t=%s.txt" % (index, _fmt(t))


def parse_snapshot_time(name):
    stem = name[:-4] if name.endswith(".txt") else name
    if "_t=" not in stem:
        raise InvalidArgumentError(
            "snapshot filename %r carries no time token" % name)
    return float(stem.split("_t=")[-1])


def write_snapshot(path, state: PhaseState, backend):
    ns = state.phi.size
    nb = state.u.size
    lines = [SNAPSHOT_MAGIC, "%s %d %d" % (backend, ns, nb)]
    for i in range(ns):
        lines.append("%d %s %s %s %s" % (
            i, _fmt(state.phi[i]), _fmt(state.v[i]),
            _fmt(state.mu[i]), _fmt(state.theta[i])))
    for i in range(nb):
        lines.append("%d %s" % (i, _fmt(state.u[i])))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path, t=0.0):
    """Read one snapshot; t is taken from the caller (filename token)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SNAPSHOT_MAGIC:
        raise InvalidArgumentError(
            "%s: not a snapshot file (bad magic line)" % path)
    head = lines[1].split()
    if len(head) != 3:
        raise InvalidArgumentError("%s: malformed header line 2" % path)
    backend = head[0]
    try:
        ns, nb = int(head[1]), int(head[2])
    except ValueError:
        raise InvalidArgumentError("%s: malformed counts on line 2" % path)
    if len(lines) < 2 + ns + nb:
        raise InvalidArgumentError(
            "%s: truncated, expected %d data lines" % (path, ns + nb))
    phi = np.empty(ns)
    v = np.empty(ns)
    mu = np.empty(ns)
    theta = np.empty(ns)
    for k in range(ns):
        parts = lines[2 + k].split()
        if len(parts) != 5:
            raise InvalidArgumentError(
                "%s: line %d needs 5 fields" % (path, 3 + k))
        i = int(parts[0])
        phi[i], v[i], mu[i], theta[i] = (float(p) for p in parts[1:])
    u = np.empty(nb)
    for k in range(nb):
        parts = lines[2 + ns + k].split()
        if len(parts) != 2:
            raise InvalidArgumentError(
                "%s: line %d needs 2 fields" % (path, 3 + ns + k))
        u[int(parts[0])] = float(parts[1])
    state = PhaseState(t=t, u=u, phi=phi, v=v, mu=mu, theta=theta)
    return backend, state


def records_from_states(states, surface, bulk, params):
    """Diagnostics rows for a snapshot sequence.

    The residual column uses the gap between consecutive snapshots, so
    the rows are a pure function of the states and reproducible from
    written files alone.
    """
    recs = [record_state(s, surface, bulk, params) for s in states]
    for k in range(1, len(recs)):
        gap = recs[k].t - recs[k - 1].t
        diss = recs[k].diss_mu + recs[k].diss_theta + recs[k].diss_u
        recs[k].energy_residual = (
            (recs[k].E_total - recs[k - 1].E_total) / gap
            + diss - recs[k].q_work)
    return recs


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def read_summary(path):
    with open(path) as fh:
        return json.load(fh)
