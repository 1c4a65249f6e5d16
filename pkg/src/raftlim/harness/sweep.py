"""Single-run execution and the epsilon-sweep coordinator.

Sweep runs are independent; each writes into its own directory and the
coordinator assembles one summary JSON in the requested epsilon order,
so the output bytes never depend on scheduling. Runtime statistics are
deterministic proxies (step and solver-iteration counts), never clocks.
"""

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import solver
from ..diagnostics import holder_quotient
from ..errors import InvalidArgumentError, NumericalBlowup
from ..model import init_well_prepared
from .config import ConfigError, build_meshes
from .io import (records_from_states, snapshot_filename, write_csv,
                 write_snapshot)


def run_single(cfg, out_dir, n_override=None, quiet=True):
    """Execute one configured run and write CSV plus snapshots.

    Returns the finished Trajectory; numerical failure is reported on
    the trajectory, not raised, and partial outputs are still written.
    """
    surf, bulk = build_meshes(cfg.mesh, n_override=n_override)
    params = cfg.model
    state0 = init_well_prepared(cfg.init.kind, surf, bulk, params,
                                m=cfg.init.m, M=cfg.init.M,
                                angle=cfg.init.angle)
    traj = solver.run(state0, surf, bulk, params,
                      snapshot_times=cfg.output.snapshots)

    os.makedirs(out_dir, exist_ok=True)
    snap_dir = os.path.join(out_dir, cfg.output.snapshot_dir)
    os.makedirs(snap_dir, exist_ok=True)
    for k, st in enumerate(traj.states):
        write_snapshot(os.path.join(snap_dir, snapshot_filename(k, st.t)),
                       st, cfg.mesh.backend)
    recs = records_from_states(traj.states, surf, bulk, params)
    write_csv(os.path.join(out_dir, cfg.output.csv), recs)
    if not quiet:
        last = recs[-1]
        print("run: %d snapshots, t=%g, F=%.6g, E_total=%.6g"
              % (len(recs), last.t, last.F, last.E_total))
        if traj.failed:
            print("run failed: %s" % traj.fail_reason)
    return traj


def _row_from_traj(eps, traj, surf, bulk, params):
    recs = records_from_states(traj.states, surf, bulk, params)
    first, last = recs[0], recs[-1]
    try:
        holder = holder_quotient(traj)
    except InvalidArgumentError:
        holder = None
    row = {
        "eps": eps,
        "n_surface": surf.n_vertices,
        "dt": params.dt,
        "failed": bool(traj.failed),
        "fail_reason": traj.fail_reason,
        "steps": traj.meta.get("steps_completed", 0),
        "cg_iterations": traj.meta.get("cg_iterations", 0),
        "disc_plus": last.disc_plus,
        "disc_ratio": last.disc_ratio,
        "perimeter": last.perimeter,
        "varifold_mass": last.varifold_mass,
        "mu_ratio": last.mu_ratio,
        "holder_quotient": holder,
        "E_initial": first.E_total,
        "E_max": max(r.E_total for r in recs),
        "mass_phi_delta": abs(last.mass_phi - first.mass_phi),
        "mass_total_delta": abs(last.mass_total - first.mass_total),
    }
    # NaN is not valid JSON; the sentinel becomes null
    for key, val in row.items():
        if isinstance(val, float) and not np.isfinite(val):
            row[key] = None
    return row


def _sweep_worker(args):
    cfg, eps, out_dir = args
    n_override = None
    if cfg.sweep.n_over_eps is not None:
        n_override = int(round(cfg.sweep.n_over_eps / eps))
    dt = cfg.model.dt
    if cfg.sweep.dt_over_eps is not None:
        dt = cfg.sweep.dt_over_eps * eps
    params = dataclasses.replace(cfg.model, eps=eps, dt=dt)
    run_cfg = dataclasses.replace(cfg, model=params)
    try:
        traj = run_single(run_cfg, out_dir, n_override=n_override)
    except (InvalidArgumentError, NumericalBlowup) as exc:
        return {"eps": eps, "failed": True, "fail_reason": str(exc)}
    surf, bulk = traj.surface, traj.bulk
    return _row_from_traj(eps, traj, surf, bulk, params)


def _verdicts(rows):
    ok = [r for r in rows if not r["failed"]]
    out = {"disc_ratio_decreasing": None,
           "energy_uniformly_bounded": None,
           "masses_conserved": None}
    if len(ok) >= 2:
        ratios = [r["disc_ratio"] for r in ok]
        out["disc_ratio_decreasing"] = all(
            b < a for a, b in zip(ratios, ratios[1:]))
    if ok:
        cap = 10.0 * max(max(r["E_initial"] for r in ok), 1e-30)
        out["energy_uniformly_bounded"] = all(
            r["E_max"] <= cap for r in ok)
        out["masses_conserved"] = all(
            r["mass_phi_delta"] <= 1e-8 and r["mass_total_delta"] <= 1e-8
            for r in ok)
    return out


def run_sweep(cfg, out_dir, threads=1, quiet=True):
    """Run every epsilon and assemble the summary dictionary."""
    if cfg.sweep is None:
        raise ConfigError("missing config section [sweep]")
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(cfg, eps, os.path.join(out_dir, "eps_%s" % ("%g" % eps)))
            for eps in cfg.sweep.epsilons]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(job) for job in jobs]
    if not quiet:
        for row in rows:
            print("eps=%g %s" % (row["eps"],
                                 "FAILED" if row["failed"] else "ok"))
    summary = {
        "epsilons": list(cfg.sweep.epsilons),
        "rows": rows,
        "verdicts": _verdicts(rows),
        "runtime": {
            "runs": len(rows),
            "failures": sum(1 for r in rows if r["failed"]),
            "total_steps": sum(r.get("steps", 0) or 0 for r in rows),
            "total_cg_iterations": sum(
                r.get("cg_iterations", 0) or 0 for r in rows),
        },
    }
    return summary
