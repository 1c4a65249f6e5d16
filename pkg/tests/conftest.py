"""Session-scoped fixtures for the expensive shared simulation runs."""

import numpy as np
import pytest

from raftlim import diagnostics, solver
from raftlim.geometry import build_circle_disk, build_sphere_ball
from raftlim.model import ExchangeSpec, ModelParams, init_well_prepared


@pytest.fixture(scope="session")
def sphere_setup():
    """Refinement-4 sphere with a thin ball (bulk unused when q=0)."""
    return build_sphere_ball(4, n_shells=2)


@pytest.fixture(scope="session")
def relaxed_cap(sphere_setup):
    """Cap at alpha=pi/3 relaxed to quasi-stationarity; shared by the
    curvature-pairing and Gibbs-Thomson checks."""
    surf, bulk = sphere_setup
    params = ModelParams(eps=0.1, dt=2e-4, T=0.15, backend="sphere",
                         exchange=ExchangeSpec(kind="zero"))
    state0 = init_well_prepared("cap", surf, bulk, params,
                                m=-np.cos(np.pi / 3), M=None)
    with np.errstate(all="ignore"):
        traj = solver.run(state0, surf, bulk, params,
                          snapshot_times=(0.15,))
    assert not traj.failed
    return traj


@pytest.fixture(scope="session")
def eps_sweep():
    """Circle epsilon-sweep {0.2, 0.1, 0.05} with n and dt scaled so
    space and time resolve the shrinking interface width equally."""
    out = {}
    for eps in (0.2, 0.1, 0.05):
        n = round(64 / eps)
        surf, bulk = build_circle_disk(n, 16, 1.0)
        params = ModelParams(eps=eps, dt=5e-3 * eps, T=0.05,
                             backend="circle",
                             exchange=ExchangeSpec(kind="zero"))
        state0 = init_well_prepared("band", surf, bulk, params,
                                    m=-0.06, M=None, angle=np.pi / 2)
        snaps = tuple(np.linspace(0.0, 0.05, 11))
        traj = solver.run(state0, surf, bulk, params,
                          snapshot_times=snaps)
        assert not traj.failed
        out[eps] = traj
    return out


@pytest.fixture(scope="session")
def richardson_residuals():
    """Max energy-identity defect after halving dt, from a band
    pre-relaxed past its initial layer so the defect scales cleanly."""
    surf, bulk = build_circle_disk(256, 16, 1.0)
    zer = ExchangeSpec(kind="zero")
    p0 = ModelParams(eps=0.1, dt=1e-3, T=0.1, backend="circle",
                     exchange=zer)
    st = init_well_prepared("band", surf, bulk, p0, m=0.2, M=2.0)
    start = solver.run(st, surf, bulk, p0,
                       snapshot_times=(0.1,)).states[-1]
    out = {}
    for dt in (1e-3, 5e-4):
        p = ModelParams(eps=0.1, dt=dt, T=0.05, backend="circle",
                        exchange=zer)
        tr = solver.run(start, surf, bulk, p)
        out[dt] = float(
            np.abs(diagnostics.energy_identity_residual(tr)).max())
    return out
