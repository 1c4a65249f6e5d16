"""Mesh builders, operators, atlas, interface extraction."""

import numpy as np
import pytest

from raftlim.errors import InvalidArgumentError, UnsupportedOperationError
from raftlim.geometry import (build_atlas, build_circle_disk,
                              build_circle_surface, build_sphere_ball,
                              build_sphere_surface, extract_interface,
                              geodesic_curvature, icosphere,
                              laplace_beltrami_apply, mollify,
                              solve_surface_poisson)
from raftlim.geometry.interface import InterfaceCurve


def l2(mesh, e):
    return float(np.sqrt(np.sum(mesh.mass * e * e)))


def angles(mesh):
    return np.arctan2(mesh.vertices[:, 1], mesh.vertices[:, 0])


# ---------------------------------------------------------------- builders

def test_circle_disk_basic():
    s, b = build_circle_disk(64, 8, 1.0)
    assert abs(s.area - 2 * np.pi) < 1e-10
    assert abs(s.mass.sum() - s.area) < 1e-12
    assert b.volume < np.pi
    assert b.volume > 0.98 * np.pi


def test_circle_disk_scaled():
    s, b = build_circle_disk(8, 2, 2.0)
    assert abs(s.area - 4 * np.pi) < 1e-10
    one = np.ones(s.n_vertices)
    assert np.abs(s.stiffness @ one).max() < 1e-10


def test_circle_disk_validation():
    with pytest.raises(InvalidArgumentError):
        build_circle_disk(4, 8, 1.0)
    with pytest.raises(InvalidArgumentError):
        build_circle_disk(7, 8, 1.0)
    with pytest.raises(InvalidArgumentError):
        build_circle_disk(64, 1, 1.0)
    with pytest.raises(InvalidArgumentError):
        build_circle_disk(64, 8, 0.0)


def test_icosphere_counts():
    for r in range(4):
        v, f = icosphere(r)
        assert v.shape[0] == 10 * 4 ** r + 2
        assert f.shape[0] == 20 * 4 ** r
    s, _ = build_sphere_ball(0)
    assert s.n_vertices == 12
    assert s.n_elements == 20


def test_sphere_ref3_area():
    s = build_sphere_surface(3)
    assert abs(s.area / (4 * np.pi) - 1) < 0.01
    assert s.area < 4 * np.pi


def test_sphere_ball_volume():
    _, b = build_sphere_ball(2)
    exact = 4 * np.pi / 3
    assert b.volume < exact
    assert abs(b.volume / exact - 1) < 0.05


def test_sphere_validation():
    with pytest.raises(InvalidArgumentError):
        build_sphere_surface(-1)
    with pytest.raises(InvalidArgumentError):
        build_sphere_ball(7)


# ------------------------------------------------------------- operators

def _all_meshes():
    s1, b1 = build_circle_disk(32, 4, 1.0)
    s2, b2 = build_sphere_ball(2)
    return [s1.stiffness, b1.stiffness, s2.stiffness, b2.stiffness]


def test_stiffness_kernel():
    for K in _all_meshes():
        one = np.ones(K.shape[0])
        scale = np.abs(K.data).max()
        assert np.abs(K @ one).max() < 1e-10 * scale


def test_stiffness_symmetry_exact():
    for K in _all_meshes():
        d = K - K.T
        assert d.nnz == 0 or np.abs(d.data).max() == 0.0


def test_stiffness_green_identity():
    rng = np.random.default_rng(0)
    for K in _all_meshes():
        a = rng.standard_normal(K.shape[0])
        b = rng.standard_normal(K.shape[0])
        lhs = float(a @ (K @ b))
        rhs = float(b @ (K @ a))
        assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))
        quad = float(a @ (K @ a))
        assert quad > -1e-10 * (1 + abs(quad))


def test_cotangent_weights_positive():
    s = build_sphere_surface(3)
    off = s.stiffness.copy()
    off.setdiag(0.0)
    off.eliminate_zeros()
    assert off.data.max() < 0.0


def test_watertight_surface():
    _, faces = icosphere(2)
    e = np.sort(np.vstack([faces[:, [0, 1]], faces[:, [1, 2]],
                           faces[:, [2, 0]]]), axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    assert np.all(counts == 2)


def test_ball_conforming_faces():
    s, b = build_sphere_ball(1)
    t = b.cells
    f = np.vstack([t[:, [1, 2, 3]], t[:, [0, 3, 2]],
                   t[:, [0, 1, 3]], t[:, [0, 2, 1]]])
    f = np.sort(f, axis=1)
    uniq, counts = np.unique(f, axis=0, return_counts=True)
    assert set(counts.tolist()) <= {1, 2}
    boundary = uniq[counts == 1]
    surf = np.sort(b.trace[s.elements], axis=1)
    surf = surf[np.lexsort(surf.T[::-1])]
    boundary = boundary[np.lexsort(boundary.T[::-1])]
    assert boundary.shape == surf.shape
    assert np.array_equal(boundary, surf)


def test_trace_coincidence():
    s, b = build_circle_disk(32, 4, 1.0)
    d = np.linalg.norm(b.vertices[b.trace] - s.vertices, axis=1)
    assert d.max() < 1e-12 * 2.0
    s, b = build_sphere_ball(2)
    d = np.linalg.norm(b.vertices[b.trace] - s.vertices, axis=1)
    assert d.max() < 1e-12 * 2.0


def test_lb_constant_kernel():
    m = build_sphere_surface(2)
    out = laplace_beltrami_apply(m, np.full(m.n_vertices, 3.5))
    assert np.abs(out).max() < 1e-10


def test_lb_sphere_harmonic_refines():
    errs = {}
    for r in (3, 5):
        m = build_sphere_surface(r)
        f = m.vertices[:, 2]
        errs[r] = l2(m, laplace_beltrami_apply(m, f) + 2 * f) / l2(m, f)
    assert errs[3] / errs[5] >= 3.0


def test_lb_circle_eigenfunction_refines():
    errs = {}
    for n in (64, 256):
        m = build_circle_surface(n, 1.0)
        f = np.cos(angles(m))
        errs[n] = l2(m, laplace_beltrami_apply(m, f) + f) / l2(m, f)
    assert errs[64] / errs[256] >= 3.0
    assert errs[256] < 1e-3


def test_lb_length_mismatch():
    m = build_circle_surface(16, 1.0)
    with pytest.raises(InvalidArgumentError):
        laplace_beltrami_apply(m, np.zeros(7))


def test_poisson_zero_source():
    m = build_circle_surface(32, 1.0)
    psi = solve_surface_poisson(m, np.zeros(32))
    assert np.abs(psi).max() < 1e-12


def test_poisson_sphere_harmonic():
    errs = {}
    for r in (3, 4):
        m = build_sphere_surface(r)
        g = m.vertices[:, 2]
        psi = solve_surface_poisson(m, g)
        assert abs(float(m.mass @ psi)) < 1e-10 * m.area
        res = m.stiffness @ psi + m.mass * g
        assert np.linalg.norm(res) < 1e-8 * np.linalg.norm(m.mass * g)
        errs[r] = l2(m, psi + g / 2) / l2(m, g / 2)
    # order >= 1.7 between successive refinements
    assert errs[3] / errs[4] >= 2.0 ** 1.7


def test_poisson_circle_eigenfunction():
    m = build_circle_surface(128, 1.0)
    g = np.cos(angles(m))
    psi = solve_surface_poisson(m, g)
    assert l2(m, psi + g) / l2(m, g) < 1e-3


def test_poisson_nonzero_mean_warns():
    m = build_circle_surface(32, 1.0)
    g = np.cos(angles(m)) + 0.5
    with pytest.warns(RuntimeWarning):
        psi = solve_surface_poisson(m, g)
    assert abs(float(m.mass @ psi)) < 1e-10 * m.area


# ----------------------------------------------------------------- atlas

@pytest.mark.parametrize("mesh", [build_circle_surface(64, 1.0),
                                  build_sphere_surface(3)],
                         ids=["circle", "sphere"])
def test_atlas_partition_of_unity(mesh):
    atlas = build_atlas(mesh)
    tot = atlas.weights.sum(axis=0)
    assert np.abs(tot - 1.0).max() < 1e-12
    # support inside the chart ball, full coverage, finite multiplicity
    assert np.all(atlas.rho[atlas.weights > 0] < atlas.radius)
    mult = (atlas.weights > 0).sum(axis=0)
    assert mult.min() >= 1
    assert atlas.max_multiplicity == mult.max()


def test_atlas_unknown_backend():
    m = build_circle_surface(16, 1.0)
    m.backend = "torus"
    with pytest.raises(InvalidArgumentError):
        build_atlas(m)


def test_mollify_preserves_constants():
    for mesh in (build_circle_surface(64, 1.0), build_sphere_surface(2)):
        atlas = build_atlas(mesh)
        out = mollify(mesh, atlas, np.full(mesh.n_vertices, 3.7), 0.2)
        assert np.abs(out - 3.7).max() < 1e-6


def test_mollify_smooth_field_converges():
    mesh = build_circle_surface(256, 1.0)
    atlas = build_atlas(mesh)
    f = np.cos(angles(mesh))
    errs = [l2(mesh, mollify(mesh, atlas, f, eta) - f)
            for eta in (0.4, 0.2, 0.1)]
    assert errs[0] > errs[1] > errs[2]


def test_mollify_rough_gradient_bound():
    mesh = build_circle_surface(256, 1.0)
    atlas = build_atlas(mesh)
    rng = np.random.default_rng(0)
    v = rng.choice([-1.0, 1.0], size=mesh.n_vertices)
    nv = l2(mesh, v)
    for eta in (0.4, 0.2, 0.1):
        grad = mesh.element_gradient(mollify(mesh, atlas, v, eta))
        gn = float(np.sqrt(np.sum(mesh.element_areas * grad * grad)))
        assert gn * eta / nv < 2.0


def test_mollify_eta_validation():
    mesh = build_circle_surface(64, 1.0)
    atlas = build_atlas(mesh)
    f = np.zeros(mesh.n_vertices)
    with pytest.raises(InvalidArgumentError):
        mollify(mesh, atlas, f, 0.0)
    with pytest.raises(InvalidArgumentError):
        mollify(mesh, atlas, f, atlas.radius / 2)


# ------------------------------------------------------------- interface

def test_interface_equator():
    m = build_sphere_surface(3)
    c = extract_interface(m, m.vertices[:, 2])
    assert len(c.components) == 1
    assert abs(c.length / (2 * np.pi) - 1) < 0.01
    phi = m.vertices[:, 2]
    a, b = c.edges[:, 0], c.edges[:, 1]
    assert np.all((phi[a] >= 0) != (phi[b] >= 0))
    assert abs(c.weights.sum() - c.length) < 1e-12 * c.length


def test_interface_empty():
    m = build_sphere_surface(2)
    c = extract_interface(m, np.ones(m.n_vertices))
    assert c.n_points == 0
    assert c.length == 0.0
    c = extract_interface(build_circle_surface(16, 1.0), -np.ones(16))
    assert c.n_points == 0


def test_interface_latitude_lengths():
    m = build_sphere_surface(4)
    for alpha in (np.pi / 3, np.pi / 2, 2 * np.pi / 3):
        c = extract_interface(m, m.vertices[:, 2] - np.cos(alpha))
        assert abs(c.length / (2 * np.pi * np.sin(alpha)) - 1) < 0.02


def test_interface_normals_point_into_positive_phase():
    m = build_sphere_surface(3)
    c = extract_interface(m, m.vertices[:, 2] - 0.3)
    nn = np.linalg.norm(c.normals, axis=1)
    assert np.abs(nn - 1).max() < 1e-8
    # positive phase is the upper cap: normals tilt toward +z
    assert c.normals[:, 2].min() > 0.5


def test_interface_circle_point_set():
    m = build_circle_surface(64, 1.0)
    c = extract_interface(m, np.cos(3 * angles(m)))
    assert c.n_points == 6
    assert c.n_points % 2 == 0
    assert c.length == 6.0
    assert c.components == []
    r = np.linalg.norm(c.points, axis=1)
    assert np.abs(r - 1.0).max() < 1e-12


def test_interface_length_mismatch():
    m = build_circle_surface(16, 1.0)
    with pytest.raises(InvalidArgumentError):
        extract_interface(m, np.zeros(5))


def test_curvature_equator_is_geodesic():
    m = build_sphere_surface(4)
    c = extract_interface(m, m.vertices[:, 2])
    k = geodesic_curvature(m, c)
    assert np.abs(k).max() < 0.05


def test_curvature_latitude_circles():
    m = build_sphere_surface(4)
    for alpha in (np.pi / 3, 2 * np.pi / 3):
        c = extract_interface(m, m.vertices[:, 2] - np.cos(alpha))
        k = geodesic_curvature(m, c)
        exact = 1.0 / np.tan(alpha)
        assert abs(k.mean() - exact) < 0.02 * abs(exact)
        assert np.abs(k - exact).max() < 0.1


def test_curvature_circle_unsupported():
    m = build_circle_surface(64, 1.0)
    c = extract_interface(m, np.cos(3 * angles(m)))
    with pytest.raises(UnsupportedOperationError):
        geodesic_curvature(m, c)


def test_curvature_needs_eight_points():
    m = build_sphere_surface(2)
    ang = 2 * np.pi * np.arange(5) / 5
    pts = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(5)])
    c = InterfaceCurve(
        backend="sphere", points=pts,
        edges=np.zeros((5, 2), dtype=int), ts=np.zeros(5),
        weights=np.ones(5), normals=np.tile([0.0, 0.0, 1.0], (5, 1)),
        components=[np.arange(5)], length=5.0)
    with pytest.raises(UnsupportedOperationError):
        geodesic_curvature(m, c)
