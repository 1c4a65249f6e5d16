"""Command-line entry point.

Subcommands: mesh (build and report), run (one simulation), sweep
(epsilon list), diag (recompute diagnostics from snapshots), oracle
(closed-form reference constants). Exit codes: 0 success, 1 config
error, 2 numerical failure, 3 I/O failure.
"""

import argparse
import os
import sys

import numpy as np
from scipy.integrate import quad

from ..errors import (InvalidArgumentError, NumericalBlowup, SolverFailure,
                      UnsupportedOperationError)
from ..model import (double_well, mesh_resolution, mm_transform,
                     surface_tension_sigma)
from . import sweep as sweep_mod
from .config import ConfigError, build_meshes, parse_config
from .io import (parse_snapshot_time, read_snapshot, records_from_states,
                 write_csv, write_summary)


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="raftlim",
        description="surface phase-field / bulk diffusion simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to the run configuration file")
        p.add_argument("--out", default=".",
                       help="output directory (default: current)")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress output")

    common(sub.add_parser("mesh", help="build the mesh and print stats"))
    common(sub.add_parser("run", help="execute one simulation"))
    p_sweep = sub.add_parser("sweep", help="run the epsilon list")
    common(p_sweep)
    p_sweep.add_argument("--threads", type=int, default=None,
                         help="parallel runs (default: RAFTLIM_THREADS "
                              "or 1)")
    common(sub.add_parser(
        "diag", help="recompute the diagnostics CSV from snapshots"))
    p_oracle = sub.add_parser(
        "oracle", help="print quadrature reference constants")
    p_oracle.add_argument("--eps", type=float, default=0.1,
                          help="interface width for the profile energy")
    p_oracle.add_argument("--quiet", action="store_true")
    return ap


def _cmd_mesh(args):
    cfg = parse_config(args.config)
    surf, bulk = build_meshes(cfg.mesh)
    print("backend: %s" % surf.backend)
    print("surface: %d vertices, %d elements, measure %.17g"
          % (surf.n_vertices, surf.n_elements, surf.area))
    print("bulk: %d vertices, %d cells, measure %.17g"
          % (bulk.n_vertices, bulk.cells.shape[0], bulk.volume))
    print("resolution h = %.17g" % mesh_resolution(surf))
    return 0


def _cmd_run(args):
    cfg = parse_config(args.config)
    traj = sweep_mod.run_single(cfg, args.out, quiet=args.quiet)
    if traj.failed:
        print("numerical failure: %s" % traj.fail_reason, file=sys.stderr)
        return 2
    return 0


def _threads(args):
    if args.threads is not None:
        return args.threads
    raw = os.environ.get("RAFTLIM_THREADS")
    if raw is None:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("RAFTLIM_THREADS is not an integer: %r" % raw)


def _cmd_sweep(args):
    cfg = parse_config(args.config)
    summary = sweep_mod.run_sweep(cfg, args.out, threads=_threads(args),
                                  quiet=args.quiet)
    write_summary(os.path.join(args.out, cfg.output.summary), summary)
    if summary["runtime"]["failures"] == summary["runtime"]["runs"]:
        print("all sweep runs failed", file=sys.stderr)
        return 2
    return 0


def _cmd_diag(args):
    cfg = parse_config(args.config)
    surf, bulk = build_meshes(cfg.mesh)
    snap_dir = os.path.join(args.out, cfg.output.snapshot_dir)
    names = sorted(n for n in os.listdir(snap_dir)
                   if n.startswith("snap_") and n.endswith(".txt"))
    if not names:
        raise InvalidArgumentError("no snapshot files in %s" % snap_dir)
    states = []
    for name in names:
        backend, st = read_snapshot(os.path.join(snap_dir, name),
                                    t=parse_snapshot_time(name))
        if backend != cfg.mesh.backend:
            raise InvalidArgumentError(
                "%s: backend %r does not match config %r"
                % (name, backend, cfg.mesh.backend))
        if st.phi.size != surf.n_vertices or st.u.size != bulk.n_vertices:
            raise InvalidArgumentError(
                "%s: sizes do not match the configured mesh" % name)
        states.append(st)
    recs = records_from_states(states, surf, bulk, cfg.model)
    stem, ext = os.path.splitext(cfg.output.csv)
    out_path = os.path.join(args.out, stem + "_diag" + (ext or ".csv"))
    write_csv(out_path, recs)
    if not args.quiet:
        print("wrote %s (%d rows)" % (out_path, len(recs)))
    return 0


def _cmd_oracle(args):
    eps = args.eps
    if eps <= 0:
        raise ConfigError("key 'eps' must be positive, got %g" % eps)
    print("sigma = %.17g" % surface_tension_sigma())
    for s in (-1.0, -0.5, 0.0, 0.5, 1.0):
        print("H(%g) = %.17g" % (s, mm_transform(s)))

    def density(x):
        phi = np.tanh(np.sqrt(2.0) * x / eps)
        dphi = np.sqrt(2.0) / eps * (1.0 - phi ** 2)
        return 0.5 * eps * dphi ** 2 + double_well(phi) / eps

    val, _ = quad(density, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12)
    print("profile_energy(eps=%g) = %.17g" % (eps, val))
    return 0


_COMMANDS = {"mesh": _cmd_mesh, "run": _cmd_run, "sweep": _cmd_sweep,
             "diag": _cmd_diag, "oracle": _cmd_oracle}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    except (InvalidArgumentError, UnsupportedOperationError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 1
    except (NumericalBlowup, SolverFailure) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
