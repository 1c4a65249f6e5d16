"""Stepping, conservation, stability, and oracle checks."""

import numpy as np
import pytest
from scipy.linalg import expm

from raftlim.errors import (InvalidArgumentError, NumericalBlowup,
                            SolverFailure)
from raftlim.geometry import build_circle_disk
from raftlim.model import (ExchangeSpec, ModelParams, PhaseState,
                           init_well_prepared)
from raftlim import solver


@pytest.fixture(scope="module")
def small_mesh():
    return build_circle_disk(128, 8, 1.0)


def pure_phase_state(surf, bulk, u_const=0.0, v_const=0.0):
    n = surf.n_vertices
    phi = -np.ones(n)
    v = np.full(n, v_const)
    theta = 2.0 * (2.0 * v - 1.0 - phi)
    return PhaseState(t=0.0, u=np.full(bulk.n_vertices, u_const),
                      phi=phi, v=v, mu=np.zeros(n), theta=theta)


def l2(mass, x):
    return float(np.sqrt(np.sum(mass * x * x)))


def test_equilibrium_state_unchanged(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.01, backend="circle")
    st = pure_phase_state(surf, bulk)
    out = solver.step(st, surf, bulk, p)
    assert np.abs(out.phi - st.phi).max() < 1e-10
    assert np.abs(out.v - st.v).max() < 1e-10
    assert np.abs(out.u - st.u).max() < 1e-10
    assert np.abs(out.mu).max() < 1e-10
    assert out.t == pytest.approx(1e-3)


def test_equilibrium_run_constant_diagnostics(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.1, backend="circle")
    with pytest.warns(RuntimeWarning):
        tr = solver.run(pure_phase_state(surf, bulk), surf, bulk, p)
    assert not tr.failed
    assert len(tr.records) == 101
    first = tr.records[0]
    for rec in tr.records[1:]:
        for col in ("F", "E_total", "mass_phi", "mass_total",
                    "disc_plus", "mm_w11", "perimeter",
                    "varifold_mass"):
            assert getattr(rec, col) == pytest.approx(
                getattr(first, col), abs=1e-12)
        assert rec.energy_residual == pytest.approx(0.0, abs=1e-10)


def test_homogeneous_matches_ode_oracle(small_mesh):
    surf, bulk = small_mesh
    k = 1e-3
    p = ModelParams(eps=0.1, dt=1e-3, T=0.5, backend="circle",
                    exchange=ExchangeSpec(kind="linear", k1=k, k2=k))
    st = pure_phase_state(surf, bulk, u_const=1.0)
    tr = solver.run(st, surf, bulk, p, snapshot_times=(0.5,))
    assert not tr.failed
    B = float(bulk.mass.sum())
    G = float(surf.mass.sum())
    A = np.array([[-(G / B) * k, (G / B) * k], [k, -k]])
    ref = expm(A * p.T) @ np.array([1.0, 0.0])
    sT = tr.states[-1]
    u_mean = float(bulk.mass @ sT.u) / B
    v_mean = float(surf.mass @ sT.v) / G
    scale = max(abs(ref[0]), abs(ref[1]))
    assert abs(u_mean - ref[0]) / scale < 1e-3
    assert abs(v_mean - ref[1]) / scale < 1e-3
    # surface fields stay spatially constant
    assert sT.v.max() - sT.v.min() < 1e-9


def test_per_step_mass_conservation(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.02, backend="circle",
                    exchange=ExchangeSpec(kind="linear", k1=0.5, k2=0.5))
    st = init_well_prepared("band", surf, bulk, p, m=0.1, M=2.0)
    tr = solver.run(st, surf, bulk, p)
    mp = np.array([r.mass_phi for r in tr.records])
    mt = np.array([r.mass_total for r in tr.records])
    scale_p = max(abs(mp[0]), 1.0)
    assert np.abs(np.diff(mp)).max() / scale_p < 1e-10
    assert np.abs(np.diff(mt)).max() / abs(mt[0]) < 1e-10


def test_energy_decay_without_exchange(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.1, backend="circle")
    st = init_well_prepared("band", surf, bulk, p, m=0.0, M=None)
    tr = solver.run(st, surf, bulk, p)
    E = np.array([r.E_total for r in tr.records])
    assert np.diff(E).max() <= 1e-8


def test_theta_identity_after_steps(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.01, backend="circle",
                    exchange=ExchangeSpec(kind="linear", k1=0.5, k2=0.5))
    st = init_well_prepared("band", surf, bulk, p, m=0.1, M=2.0)
    tr = solver.run(st, surf, bulk, p, snapshot_times=(0.01,))
    sT = tr.states[-1]
    ident = (2.0 / p.delta) * (2.0 * sT.v - 1.0 - sT.phi)
    assert np.abs(sT.theta - ident).max() < 1e-12


def test_zero_horizon_returns_initial_only(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.0, backend="circle")
    st = init_well_prepared("band", surf, bulk, p, m=0.0, M=None)
    tr = solver.run(st, surf, bulk, p)
    assert len(tr.states) == 1
    assert len(tr.records) == 1
    assert tr.states[0].t == 0.0
    assert tr.records[0].energy_residual == 0.0
    assert not tr.failed


def test_snapshot_schedule(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.01, backend="circle")
    st = init_well_prepared("band", surf, bulk, p, m=0.0, M=None)
    tr = solver.run(st, surf, bulk, p,
                    snapshot_times=(0.005, 0.005, 0.01))
    times = [s.t for s in tr.states]
    assert times == pytest.approx([0.0, 0.005, 0.01])
    assert all(b > a for a, b in zip(times, times[1:]))
    assert len(tr.records) == 11


def test_non_divisible_horizon_rejected(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.0105, backend="circle")
    st = init_well_prepared("band", surf, bulk, p, m=0.0, M=None)
    with pytest.raises(InvalidArgumentError):
        solver.run(st, surf, bulk, p)


def test_nan_input_raises_blowup(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.01, backend="circle")
    st = pure_phase_state(surf, bulk)
    st.u[0] = np.nan
    with pytest.raises(NumericalBlowup) as exc:
        solver.step(st, surf, bulk, p)
    assert "u" in str(exc.value)


def test_run_flags_partial_trajectory_on_blowup(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.01, backend="circle")
    st = pure_phase_state(surf, bulk)
    st.phi[3] = np.inf
    with np.errstate(all="ignore"):
        tr = solver.run(st, surf, bulk, p)
    assert tr.failed
    assert "phi" in tr.fail_reason
    assert len(tr.states) == 1
    assert len(tr.records) == 1


def test_solver_failure_carries_report(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.01, backend="circle",
                    solver_maxiter=2)
    st = init_well_prepared("band", surf, bulk, p, m=0.0, M=None)
    with pytest.raises(SolverFailure) as exc:
        solver.run(st, surf, bulk, p)
    assert exc.value.iterations == 2
    assert exc.value.residual > 0


def test_dt_refinement_first_order(small_mesh):
    surf, bulk = small_mesh
    lin = ExchangeSpec(kind="linear", k1=0.5, k2=0.5)
    p0 = ModelParams(eps=0.15, dt=1e-3, T=0.1, backend="circle",
                     exchange=lin)
    st = init_well_prepared("band", surf, bulk, p0, m=0.1, M=2.0)
    start = solver.run(st, surf, bulk, p0,
                       snapshot_times=(0.1,)).states[-1]
    term = {}
    for dt in (1e-3, 5e-4, 2.5e-4):
        p = ModelParams(eps=0.15, dt=dt, T=0.02, backend="circle",
                        exchange=lin)
        tr = solver.run(start, surf, bulk, p, snapshot_times=(0.02,))
        term[dt] = tr.states[-1].phi
    d1 = l2(surf.mass, term[1e-3] - term[5e-4])
    d2 = l2(surf.mass, term[5e-4] - term[2.5e-4])
    assert 1.7 <= d1 / d2 <= 2.3


def test_trajectory_metadata(small_mesh):
    surf, bulk = small_mesh
    p = ModelParams(eps=0.1, dt=1e-3, T=0.005, backend="circle")
    st = init_well_prepared("band", surf, bulk, p, m=0.0, M=None)
    tr = solver.run(st, surf, bulk, p)
    assert tr.meta["steps_completed"] == 5
    assert tr.meta["backend"] == "circle"
    assert tr.meta["cg_iterations"] > 0
    assert tr.states[0].phi is not st.phi
