"""Measured quantities of the sharp-interface convergence analysis.

Everything here is a pure read-only function of a state and its meshes:
energy bookkeeping, the discrepancy measure and its positive part, the
profile-transform W11 norm, the time Hölder quotient, the chemical
potential bound, the discrete varifold with its first variation, the
curvature pairing, the Gibbs-Thomson ratio, and the mass-vs-perimeter
inequality.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UnsupportedOperationError
from .geometry.interface import extract_interface, geodesic_curvature
from .model import (double_well, energy, exchange_eval, gl_parts,
                    surface_tension_sigma, _h_closed)

CSV_COLUMNS = [
    "t", "F", "E_total", "mass_phi", "mass_total",
    "diss_mu", "diss_theta", "diss_u", "q_work",
    "disc_plus", "disc_ratio", "mmW11", "mu_ratio",
    "perimeter", "varifold_mass", "energy_residual",
]

_COLUMN_ATTRS = [c if c != "mmW11" else "mm_w11" for c in CSV_COLUMNS]


@dataclass
class DiagnosticsRecord:
    """One row of the per-step time series."""

    t: float
    F: float
    E_total: float
    mass_phi: float
    mass_total: float
    diss_mu: float
    diss_theta: float
    diss_u: float
    q_work: float
    disc_plus: float
    disc_ratio: float
    mm_w11: float
    mu_ratio: float
    perimeter: float
    varifold_mass: float
    energy_residual: float

    def as_row(self):
        return [getattr(self, c) for c in _COLUMN_ATTRS]


def discrepancy(state, surface, params):
    """Positive part, absolute mass, and per-element density of
    xi = eps/2 |grad phi|^2 - W(phi)/eps (vertex-averaged W)."""
    g = surface.element_gradient(state.phi)
    if g.ndim == 1:
        grad2 = g * g
    else:
        grad2 = np.einsum("ij,ij->i", g, g)
    wbar = double_well(state.phi[surface.elements]).mean(axis=1)
    xi = 0.5 * params.eps * grad2 - wbar / params.eps
    A = surface.element_areas
    plus = float(np.sum(A * np.maximum(xi, 0.0)))
    total = float(np.sum(A * np.abs(xi)))
    return plus, total, xi


def gl_energy(state, surface, params):
    """Ginzburg-Landau part of F; the varifold mass shares this sum."""
    grad_e, well_e = gl_parts(surface, state.phi, params.eps)
    return float((grad_e + well_e).sum())


def mm_w11_norm(state, surface):
    """Integral of |grad H(phi)| with H applied nodally."""
    h = _h_closed(state.phi)
    g = surface.element_gradient(h)
    if g.ndim == 1:
        mag = np.abs(g)
    else:
        mag = np.sqrt(np.einsum("ij,ij->i", g, g))
    return float(np.sum(surface.element_areas * mag))


def holder_quotient(traj, exponent=0.125):
    """Max over snapshot pairs of ||phi(t) - phi(tau)|| / |t - tau|^a."""
    states = traj.states
    if len(states) < 3:
        raise InvalidArgumentError(
            "need at least 3 snapshots, got %d" % len(states))
    mass = traj.surface.mass
    best = 0.0
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            dt = abs(states[j].t - states[i].t)
            if dt == 0.0:
                continue
            d = states[j].phi - states[i].phi
            nrm = float(np.sqrt(np.sum(mass * d * d)))
            best = max(best, nrm / dt ** exponent)
    return best


def mu_bound_ratio(state, surface, params):
    """||mu||_H1 over (GL energy + ||grad mu|| + ||theta||)."""
    gmu2 = float(state.mu @ (surface.stiffness @ state.mu))
    nmu2 = float(np.sum(surface.mass * state.mu ** 2))
    h1 = np.sqrt(max(nmu2 + gmu2, 0.0))
    den = (gl_energy(state, surface, params) + np.sqrt(max(gmu2, 0.0))
           + np.sqrt(float(np.sum(surface.mass * state.theta ** 2))))
    if den < 1e-14:
        warnings.warn("mu_bound_ratio denominator below 1e-14",
                      RuntimeWarning)
        return float("nan")
    return h1 / den


@dataclass
class DiscreteVarifold:
    """Element-supported varifold: weights, directions, coefficients.

    ``s_hat`` is the unit phase-gradient direction, ``d_hat`` the unit
    interface tangent orthogonal to it; ``coeffs[:, 0]`` weights the
    delta at s_hat (always 1) and ``coeffs[:, 1]`` the one at d_hat
    (1 - eps |grad phi|^2 / density, the discrepancy-splitting factor).
    Elements without a resolvable direction keep their weight but are
    excluded from first-variation quadrature.
    """

    backend: str
    lam: np.ndarray
    s_hat: np.ndarray
    d_hat: np.ndarray
    coeffs: np.ndarray
    defined: np.ndarray
    excluded_mass: float

    @property
    def mass(self):
        return float(self.lam.sum())


def build_varifold(state, surface, params) -> DiscreteVarifold:
    grad_e, well_e = gl_parts(surface, state.phi, params.eps)
    lam = grad_e + well_e
    m = surface.n_elements
    g = surface.element_gradient(state.phi)
    if surface.backend == "circle":
        # 1D tangent space: no direction orthogonal to grad phi exists
        defined = np.zeros(m, dtype=bool)
        s_hat = np.zeros((m, 2))
        d_hat = np.zeros((m, 2))
        ctilde = np.zeros(m)
    else:
        gn = np.linalg.norm(g, axis=1)
        defined = gn >= 1e-12 * max(gn.max(), 1e-300)
        s_hat = np.zeros((m, 3))
        s_hat[defined] = g[defined] / gn[defined, None]
        d_hat = np.cross(surface.element_normals, s_hat)
        dn = np.linalg.norm(d_hat, axis=1)
        d_hat[defined] /= dn[defined, None]
        d_hat[~defined] = 0.0
        dens = lam / surface.element_areas
        with np.errstate(divide="ignore", invalid="ignore"):
            ctilde = np.where(dens > 0, params.eps * gn ** 2 / dens, 0.0)
    coeffs = np.column_stack([np.ones(m), 1.0 - ctilde])
    excluded = float(lam[~defined].sum())
    return DiscreteVarifold(backend=surface.backend, lam=lam,
                            s_hat=s_hat, d_hat=d_hat, coeffs=coeffs,
                            defined=defined, excluded_mass=excluded)


def _ensure_tangent(surface, Y):
    """Project Y onto the tangent space; warn if it was not tangent."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape != surface.vertices.shape:
        raise InvalidArgumentError("Y must be per-vertex vectors")
    rad = surface.vertices / np.linalg.norm(
        surface.vertices, axis=1)[:, None]
    normal_part = np.einsum("ij,ij->i", Y, rad)
    if np.abs(normal_part).max() > 1e-8:
        warnings.warn("test field projected onto the tangent space",
                      RuntimeWarning)
    return Y - rad * normal_part[:, None]


def first_variation(V: DiscreteVarifold, surface, Y):
    """delta V(Y): tangential-derivative quadrature against the
    varifold over elements with defined directions."""
    Y = _ensure_tangent(surface, Y)
    if not np.any(V.defined):
        return 0.0
    sel = V.defined
    els = surface.elements[sel]
    gb = surface.grad_basis[sel]                       # (k, 3, 3)
    Ye = Y[els]                                        # (k, 3, dim)
    # D_Gamma Y with rows = components, columns = derivative direction
    D = np.einsum("eki,ekj->eij", Ye, gb)
    d = V.d_hat[sel]
    s = V.s_hat[sel]
    dd = np.einsum("eij,ei,ej->e", D, d, d)
    ss = np.einsum("eij,ei,ej->e", D, s, s)
    c2 = V.coeffs[sel, 1]
    return float(np.sum(V.lam[sel] * (dd + c2 * ss)))


def curvature_pairing(state, surface, Y):
    """Diffuse curvature pairing -integral (mu + theta/2) Y . grad phi."""
    Y = _ensure_tangent(surface, Y)
    omega = state.mu + 0.5 * state.theta
    els = surface.elements
    wY = omega[:, None] * Y
    val = wY[els].mean(axis=1)                         # (m, dim)
    g = surface.element_gradient(state.phi)
    if g.ndim == 1:
        p = surface.vertices[els]
        tang = p[:, 1] - p[:, 0]
        tang /= np.linalg.norm(tang, axis=1)[:, None]
        g = g[:, None] * tang
    dots = np.einsum("ij,ij->i", val, g)
    return -float(np.sum(surface.element_areas * dots))


@dataclass
class GibbsThomsonStats:
    """Weighted statistics of (2 mu + theta) / kappa_g on the interface."""

    n_total: int
    n_excluded: int
    mean: float
    std: float
    cov: float
    ratio_over_sigma: float
    sigma: float


def gibbs_thomson_check(state, surface, params) -> GibbsThomsonStats:
    if surface.backend != "sphere":
        raise UnsupportedOperationError(
            "Gibbs-Thomson sampling needs the sphere backend")
    curve = extract_interface(surface, state.phi)
    if curve.n_points == 0:
        raise InvalidArgumentError("interface is empty")
    kappa = geodesic_curvature(surface, curve)
    f = 2.0 * state.mu + state.theta
    a, b = curve.edges[:, 0], curve.edges[:, 1]
    fval = (1.0 - curve.ts) * f[a] + curve.ts * f[b]
    keep = np.abs(kappa) > 0.1
    sigma = surface_tension_sigma()
    n_excl = int(np.sum(~keep))
    if not np.any(keep):
        return GibbsThomsonStats(
            n_total=curve.n_points, n_excluded=n_excl,
            mean=float("nan"), std=float("nan"), cov=float("nan"),
            ratio_over_sigma=float("nan"), sigma=sigma)
    r = fval[keep] / kappa[keep]
    w = curve.weights[keep]
    mean = float(np.sum(w * r) / np.sum(w))
    std = float(np.sqrt(np.sum(w * (r - mean) ** 2) / np.sum(w)))
    cov = std / abs(mean) if mean != 0.0 else float("inf")
    return GibbsThomsonStats(
        n_total=curve.n_points, n_excluded=n_excl, mean=mean, std=std,
        cov=cov, ratio_over_sigma=mean / sigma, sigma=sigma)


def varifold_mass_vs_perimeter(state, surface, params):
    """(m_V, sigma * perimeter, ratio >= 1 expected when prepared)."""
    m_v = gl_energy(state, surface, params)
    length = extract_interface(surface, state.phi).length
    sp = surface_tension_sigma() * length
    ratio = m_v / sp if sp > 0 else float("inf")
    return m_v, sp, ratio


def energy_identity_residual(traj):
    """Per-step residual of the discrete energy identity."""
    recs = traj.records
    if len(recs) < 2:
        raise InvalidArgumentError("need at least 2 recorded steps")
    out = np.empty(len(recs) - 1)
    for n in range(1, len(recs)):
        dt = recs[n].t - recs[n - 1].t
        diss = recs[n].diss_mu + recs[n].diss_theta + recs[n].diss_u
        out[n - 1] = ((recs[n].E_total - recs[n - 1].E_total) / dt
                      + diss - recs[n].q_work)
    return out


def record_state(state, surface, bulk, params,
                 prev: DiagnosticsRecord = None) -> DiagnosticsRecord:
    """Assemble one time-series row; residual needs the previous row."""
    F, E = energy(state, surface, params, bulk)
    mass_phi = float(surface.mass @ state.phi)
    mass_total = (float(surface.mass @ state.v)
                  + float(bulk.mass @ state.u))
    diss_mu = float(state.mu @ (surface.stiffness @ state.mu))
    diss_theta = float(state.theta @ (surface.stiffness @ state.theta))
    diss_u = float(state.u @ (bulk.stiffness @ state.u))
    q = exchange_eval(params.exchange, state.u[bulk.trace], state.v)
    q_work = float(np.sum(surface.mass * q
                          * (state.theta - state.u[bulk.trace])))
    plus, _, _ = discrepancy(state, surface, params)
    ratio = plus / F if F > 0.0 else 0.0
    if prev is None:
        residual = 0.0
    else:
        residual = ((E - prev.E_total) / params.dt
                    + diss_mu + diss_theta + diss_u - q_work)
    return DiagnosticsRecord(
        t=state.t, F=F, E_total=E, mass_phi=mass_phi,
        mass_total=mass_total, diss_mu=diss_mu, diss_theta=diss_theta,
        diss_u=diss_u, q_work=q_work, disc_plus=plus, disc_ratio=ratio,
        mm_w11=mm_w11_norm(state, surface),
        mu_ratio=mu_bound_ratio(state, surface, params),
        perimeter=extract_interface(surface, state.phi).length,
        varifold_mass=gl_energy(state, surface, params),
        energy_residual=residual)
