"""Potential, energy, exchange term, profile transform, initial data.

Quadrature policy: the Ginzburg-Landau energy integrates W over the
linear interpolant exactly (3-point Gauss on segments, degree-4 rule on
triangles), the gradient term is the elementwise-constant square, and
the coupling term is lumped. The W' load is the consistent one against
the P1 basis, so the nodal chemical-potential relation is the exact
gradient of the discrete energy.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import InvalidArgumentError
from .geometry.bulk import BulkMesh
from .geometry.surface import SurfaceMesh


def double_well(s):
    """W(s) = (1 - s^2)^2."""
    s = np.asarray(s, dtype=float)
    w = (1.0 - s * s) ** 2
    return w if w.ndim else float(w)


def double_well_prime(s):
    """W'(s) = 4 s^3 - 4 s."""
    s = np.asarray(s, dtype=float)
    w = 4.0 * s * s * s - 4.0 * s
    return w if w.ndim else float(w)


_SQRT3 = np.sqrt(3.0)


def _mm_integrand(r):
    return np.sqrt(np.minimum((1.0 - r * r) ** 2, 1.0 + r * r))


def mm_transform(s):
    """H(s): antiderivative of sqrt(min(W, 1 + r^2)) from -1.

    Strictly increasing; inputs below -1 are clamped with a warning.
    Adaptive quadrature, absolute tolerance 1e-9.
    """
    s = float(s)
    if s < -1.0:
        warnings.warn("mm_transform input %.6g clamped to -1" % s,
                      RuntimeWarning)
        s = -1.0
    if s == -1.0:
        return 0.0
    pts = [p for p in (1.0, _SQRT3) if -1.0 < p < s]
    val, _ = quad(_mm_integrand, -1.0, s, points=pts or None,
                  epsabs=1e-9, limit=200)
    return val


_H_FAR = 2.0 - 0.5 * (_SQRT3 * 2.0 + np.arcsinh(_SQRT3))


def _h_closed(s):
    """Vectorized closed form of mm_transform (silent clamp at -1)."""
    s = np.clip(np.asarray(s, dtype=float), -1.0, None)
    inner = s - s ** 3 / 3.0 + 2.0 / 3.0
    mid = 2.0 + s ** 3 / 3.0 - s
    far = _H_FAR + 0.5 * (s * np.sqrt(1.0 + s * s) + np.arcsinh(s))
    out = np.where(s <= 1.0, inner, np.where(s <= _SQRT3, mid, far))
    return out if out.ndim else float(out)


def surface_tension_sigma():
    """1D profile energy sigma = integral of sqrt(2 W) over [-1, 1]."""
    val, _ = quad(lambda s: np.sqrt(2.0) * (1.0 - s * s), -1.0, 1.0,
                  epsabs=1e-9)
    return val


@dataclass
class ExchangeSpec:
    """Exchange term q(u, v); kinds: zero, linear (q = k1 u - k2 v)."""

    kind: str = "zero"
    k1: float = 0.0
    k2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "linear"):
            raise InvalidArgumentError(
                "exchange kind must be zero or linear, got %r" % self.kind)
        if self.k1 < 0 or self.k2 < 0:
            raise InvalidArgumentError("exchange coefficients must be >= 0")


def exchange_eval(spec: ExchangeSpec, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if spec.kind == "zero":
        out = np.zeros(np.broadcast_shapes(u.shape, v.shape))
    else:
        out = spec.k1 * u - spec.k2 * v
    return out if out.ndim else float(out)


def validate_growth(spec, C):
    """Check |q(u,v)| <= C (1 + |u| + |v|) on a deterministic grid."""
    if callable(spec):
        qfun = spec
    else:
        def qfun(u, v):
            return exchange_eval(spec, u, v)
    g = np.concatenate([[0.0], 10.0 ** np.linspace(0.0, 6.0, 13)])
    g = np.concatenate([-g[::-1], g])
    for u in g:
        for v in g:
            bound = C * (1.0 + abs(u) + abs(v))
            if abs(qfun(u, v)) > bound + 1e-9 * (1.0 + bound):
                return False
    return True


@dataclass
class ModelParams:
    """Physical and numerical parameters of a run."""

    eps: float
    dt: float
    T: float
    delta: float = 1.0
    S: float = 4.0
    exchange: ExchangeSpec = field(default_factory=ExchangeSpec)
    backend: str = "circle"
    solver_tol: float = 1e-10
    solver_maxiter: int = 10000

    def __post_init__(self):
        for name in ("eps", "dt", "delta"):
            if getattr(self, name) <= 0:
                raise InvalidArgumentError("%s must be positive" % name)
        if self.T < 0:
            raise InvalidArgumentError("T must be >= 0")
        if self.S < 0:
            raise InvalidArgumentError("S must be >= 0")
        if self.backend not in ("circle", "sphere"):
            raise InvalidArgumentError(
                "backend must be circle or sphere, got %r" % self.backend)


def mesh_resolution(surface: SurfaceMesh):
    """Longest element edge of the surface mesh."""
    if surface.backend == "circle":
        return float(surface.element_areas.max())
    p = surface.vertices[surface.elements]
    e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
    return float(np.linalg.norm(e, axis=2).max())


def validate_resolution(params: ModelParams, surface: SurfaceMesh):
    """Require eps >= h; warn below the recommended eps >= 2h."""
    h = mesh_resolution(surface)
    if params.eps < h:
        raise InvalidArgumentError(
            "eps=%.4g under-resolved: below mesh size h=%.4g"
            % (params.eps, h))
    if params.eps < 2.0 * h:
        warnings.warn(
            "eps=%.4g below recommended 2h=%.4g" % (params.eps, 2.0 * h),
            RuntimeWarning)


@dataclass
class PhaseState:
    """Fields at one time level.

    The nodal identity theta = (2/delta)(2v - 1 - phi) holds after
    construction and after every accepted step.
    """

    t: float
    u: np.ndarray
    phi: np.ndarray
    v: np.ndarray
    mu: np.ndarray
    theta: np.ndarray

    def copy(self):
        return PhaseState(t=self.t, u=self.u.copy(), phi=self.phi.copy(),
                          v=self.v.copy(), mu=self.mu.copy(),
                          theta=self.theta.copy())


# 1D Gauss 3-point rule on [0, 1] (exact to degree 5)
_G1D_X = np.array([0.5 - 0.5 * np.sqrt(0.6), 0.5, 0.5 + 0.5 * np.sqrt(0.6)])
_G1D_W = np.array([5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0])

# degree-4 triangle rule, barycentric points and weights (sum 1)
_A1, _B1 = 0.108103018168070, 0.445948490915965
_A2, _B2 = 0.816847572980459, 0.091576213509771
_TRI_P = np.array([
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2]])
_TRI_W = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)


def _element_values(surface, phi):
    return phi[surface.elements]                       # (m, k)


def gl_parts(surface: SurfaceMesh, phi, eps):
    """Per-element Ginzburg-Landau split: gradient term and well term.

    Returns (grad_e, well_e); their sum is the element varifold weight
    and the total sum is the GL part of the energy.
    """
    pe = _element_values(surface, phi)
    if surface.backend == "circle":
        grad = surface.element_gradient(phi)
        grad2 = grad * grad
        vals = pe[:, 0][:, None] * (1.0 - _G1D_X) + pe[:, 1][:, None] * _G1D_X
        wint = (double_well(vals) * _G1D_W).sum(axis=1)
    else:
        g = surface.element_gradient(phi)
        grad2 = np.einsum("ij,ij->i", g, g)
        vals = pe @ _TRI_P.T                           # (m, 6)
        wint = (double_well(vals) * _TRI_W).sum(axis=1)
    A = surface.element_areas
    return (0.5 * eps) * A * grad2, (A / eps) * wint


def wprime_load(surface: SurfaceMesh, phi):
    """Consistent load b_i = integral of W'(phi_lin) lambda_i."""
    pe = _element_values(surface, phi)
    out = np.zeros(phi.shape[0])
    A = surface.element_areas
    if surface.backend == "circle":
        vals = pe[:, 0][:, None] * (1.0 - _G1D_X) + pe[:, 1][:, None] * _G1D_X
        wp = double_well_prime(vals)
        np.add.at(out, surface.elements[:, 0],
                  A * (wp * (_G1D_W * (1.0 - _G1D_X))).sum(axis=1))
        np.add.at(out, surface.elements[:, 1],
                  A * (wp * (_G1D_W * _G1D_X)).sum(axis=1))
    else:
        vals = pe @ _TRI_P.T
        wp = double_well_prime(vals)
        for k in range(3):
            np.add.at(out, surface.elements[:, k],
                      A * (wp * (_TRI_W * _TRI_P[:, k])).sum(axis=1))
    return out


def coupling_residual(state: PhaseState):
    """Nodal 2v - 1 - phi."""
    return 2.0 * state.v - 1.0 - state.phi


def energy(state: PhaseState, surface: SurfaceMesh, params: ModelParams,
           bulk: BulkMesh = None):
    """Free energy F and total energy F + bulk kinetic-style term.

    The bulk mesh is only needed when u is not identically zero.
    """
    grad_e, well_e = gl_parts(surface, state.phi, params.eps)
    r = coupling_residual(state)
    F = float(grad_e.sum() + well_e.sum()
              + 0.5 / params.delta * np.sum(surface.mass * r * r))
    if bulk is None:
        if np.any(state.u != 0.0):
            raise InvalidArgumentError(
                "bulk mesh required for nonzero u")
        return F, F
    Eu = 0.5 * float(np.sum(bulk.mass * state.u * state.u))
    return F, F + Eu


def _signed_distance(surface, kind, angle):
    """Signed geodesic distance to the target curve; positive inside."""
    if surface.backend == "circle":
        R = surface.radius
        th = np.arctan2(surface.vertices[:, 1], surface.vertices[:, 0])
        if kind in ("band", "cap"):
            return R * (angle - np.abs(th))
        if kind == "two-point":
            return R * (angle - np.minimum(np.abs(th), np.pi - np.abs(th)))
    else:
        pol = np.arccos(np.clip(surface.vertices[:, 2], -1.0, 1.0))
        if kind == "cap":
            return angle - pol
        if kind == "band":
            return angle - np.abs(pol - np.pi / 2.0)
        if kind == "two-point":
            return angle - np.minimum(pol, np.pi - pol)
    raise InvalidArgumentError("unknown init kind %r" % kind)


def _default_angle(backend, kind, m):
    if backend == "circle":
        if kind in ("band", "cap"):
            return np.pi * (1.0 + m) / 2.0
        return np.pi * (1.0 + m) / 4.0
    if kind == "cap":
        return float(np.arccos(-m))
    if kind == "band":
        return float(np.arcsin((1.0 + m) / 2.0))
    return float(np.arccos((1.0 - m) / 2.0))


def init_well_prepared(kind, surface: SurfaceMesh, bulk: BulkMesh,
                       params: ModelParams, m, M,
                       angle=None, v_plus=1.0, v_minus=0.0) -> PhaseState:
    """Well-prepared initial data: tanh profile, exact mean targets.

    phi0 is a tanh profile of width eps across the target curve shifted
    by a constant so its area mean is exactly m; v0 interpolates between
    v_plus in the positive phase and v_minus, rescaled (or topped up by
    a constant bulk u0) so the combined mass is exactly M; M=None keeps
    the natural profile mass with an empty bulk.
    """
    if not -1.0 < m < 1.0:
        raise InvalidArgumentError("m must lie in (-1, 1), got %r" % (m,))
    if M is not None and M < 0:
        raise InvalidArgumentError("M must be >= 0, got %r" % (M,))
    if kind not in ("band", "cap", "two-point"):
        raise InvalidArgumentError("unknown init kind %r" % kind)
    if angle is None:
        angle = _default_angle(surface.backend, kind, m)

    d = _signed_distance(surface, kind, angle)
    raw = np.tanh(np.sqrt(2.0) * d / params.eps)
    shift = m - float(surface.mass @ raw) / surface.area
    phi0 = raw + shift

    v0 = 0.5 * (1.0 + phi0) * v_plus + 0.5 * (1.0 - phi0) * v_minus
    V1 = float(surface.mass @ v0)
    if M is None:
        # natural mass: keep the profile, leave the bulk empty
        u0 = np.zeros(bulk.n_vertices)
    elif M >= V1:
        u0 = np.full(bulk.n_vertices, (M - V1) / bulk.volume)
    elif V1 > 0:
        v0 = v0 * (M / V1)
        u0 = np.zeros(bulk.n_vertices)
    else:
        raise InvalidArgumentError(
            "cannot reach total mass M=%.4g from v-profile mass %.4g"
            % (M, V1))

    theta0 = (2.0 / params.delta) * (2.0 * v0 - 1.0 - phi0)
    mu0 = ((params.eps * (surface.stiffness @ phi0)
            + wprime_load(surface, phi0) / params.eps) / surface.mass
           - (2.0 * v0 - 1.0 - phi0) / params.delta)
    return PhaseState(t=0.0, u=u0, phi=phi0, v=v0, mu=mu0, theta=theta0)
