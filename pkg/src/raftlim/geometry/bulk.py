"""Bulk meshes (disk, ball) conforming to a surface mesh at the boundary.

The disk pairs with the circle backend: concentric rings of the same
angular resolution, quads split into triangles, a single center vertex.
The ball pairs with the icosphere: concentric shells with the icosphere
connectivity, prisms split into tetrahedra with a vertex-index diagonal
rule so neighbouring prisms agree on their shared quad faces.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgumentError
from .surface import (SurfaceMesh, _offdiag_to_stiffness,
                      build_circle_surface, build_sphere_surface, icosphere)


@dataclass
class BulkMesh:
    """Discrete bulk with operators and the boundary trace map.

    ``trace`` maps each surface-vertex index to the bulk vertex at the
    same position; ``mass`` is the lumped bulk mass, ``stiffness`` the
    P1 stiffness with the constant vector in its kernel.
    """

    vertices: np.ndarray
    cells: np.ndarray
    mass: np.ndarray
    stiffness: sp.csr_matrix
    trace: np.ndarray
    volume: float

    @property
    def n_vertices(self):
        return self.vertices.shape[0]


def _triangle_operators(verts, tris):
    """Lumped mass and stiffness for P1 triangles in the plane."""
    p = verts[tris]                                    # (m, 3, 2)
    e0 = p[:, 2] - p[:, 1]
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    cross = e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0])
    area = 0.5 * np.abs(cross)
    if np.any(area <= 0):
        raise InvalidArgumentError("degenerate triangle in bulk mesh")
    rows, cols, vals = [], [], []
    edges = (e0, e1, e2)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        # K_ij = (e_i . e_j) / (4 A) with e_m the edge opposite vertex m
        dot = np.einsum("ij,ij->i", edges[i], edges[j])
        w = 0.25 * dot / area
        rows += [tris[:, i], tris[:, j]]
        cols += [tris[:, j], tris[:, i]]
        vals += [w, w]
    K = _offdiag_to_stiffness(
        verts.shape[0], np.concatenate(rows), np.concatenate(cols),
        np.concatenate(vals))
    mass = np.zeros(verts.shape[0])
    np.add.at(mass, tris.ravel(), np.repeat(area / 3.0, 3))
    return mass, K, float(area.sum())


def _tet_operators(verts, tets):
    """Lumped mass and stiffness for P1 tetrahedra."""
    p = verts[tets]                                    # (m, 4, 3)
    a = p[:, 1] - p[:, 0]
    b = p[:, 2] - p[:, 0]
    c = p[:, 3] - p[:, 0]
    vol6 = np.einsum("ij,ij->i", a, np.cross(b, c))
    if np.any(vol6 <= 0):
        raise InvalidArgumentError("negatively oriented tetrahedron")
    vol = vol6 / 6.0
    # gradients of the barycentric basis
    g1 = np.cross(b, c) / vol6[:, None]
    g2 = np.cross(c, a) / vol6[:, None]
    g3 = np.cross(a, b) / vol6[:, None]
    g0 = -(g1 + g2 + g3)
    grads = np.stack([g0, g1, g2, g3], axis=1)         # (m, 4, 3)
    rows, cols, vals = [], [], []
    for i in range(4):
        for j in range(i + 1, 4):
            w = vol * np.einsum("ij,ij->i", grads[:, i], grads[:, j])
            rows += [tets[:, i], tets[:, j]]
            cols += [tets[:, j], tets[:, i]]
            vals += [w, w]
    K = _offdiag_to_stiffness(
        verts.shape[0], np.concatenate(rows), np.concatenate(cols),
        np.concatenate(vals))
    mass = np.zeros(verts.shape[0])
    np.add.at(mass, tets.ravel(), np.repeat(vol / 4.0, 4))
    return mass, K, float(vol.sum())


def build_circle_disk(n_surface, n_radial, radius):
    """Circle surface plus conforming disk bulk.

    Returns ``(SurfaceMesh, BulkMesh)``. Ring ``j`` sits at radius
    ``j * radius / n_radial``; the outer ring carries the surface
    vertices in the same angular order.
    """
    if n_surface < 8:
        raise InvalidArgumentError(
            "n_surface must be >= 8, got %d" % n_surface)
    if n_radial < 2:
        raise InvalidArgumentError(
            "n_radial must be >= 2, got %d" % n_radial)
    if radius <= 0:
        raise InvalidArgumentError("radius must be positive")
    surface = build_circle_surface(n_surface, radius)

    n, J = n_surface, n_radial
    ang = 2.0 * np.pi * np.arange(n) / n
    ca, sa = np.cos(ang), np.sin(ang)
    verts = [np.zeros((1, 2))]
    for j in range(1, J + 1):
        r = radius * j / J
        verts.append(np.column_stack([r * ca, r * sa]))
    verts = np.vstack(verts)
    # boundary ring duplicates the surface positions exactly
    verts[1 + (J - 1) * n:] = surface.vertices

    def ring(j, i):
        return 1 + (j - 1) * n + (i % n)

    tris = []
    for i in range(n):
        tris.append([0, ring(1, i), ring(1, i + 1)])
    for j in range(1, J):
        for i in range(n):
            a, b = ring(j, i), ring(j, i + 1)
            c, d = ring(j + 1, i + 1), ring(j + 1, i)
            # split the quad along the diagonal from its smallest vertex
            if min(a, c) < min(b, d):
                tris += [[a, b, c], [a, c, d]]
            else:
                tris += [[a, b, d], [b, c, d]]
    tris = np.array(tris)
    # enforce counterclockwise orientation
    p = verts[tris]
    cr = ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
          - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))
    tris[cr < 0] = tris[cr < 0][:, [0, 2, 1]]

    mass, K, vol = _triangle_operators(verts, tris)
    tracemap = np.arange(1 + (J - 1) * n, 1 + J * n)
    bulk = BulkMesh(vertices=verts, cells=tris, mass=mass, stiffness=K,
                    trace=tracemap, volume=vol)
    return surface, bulk


_PRISM_ROTATIONS = [
    (0, 1, 2, 3, 4, 5),
    (1, 2, 0, 4, 5, 3),
    (2, 0, 1, 5, 3, 4),
    (3, 5, 4, 0, 2, 1),
    (4, 3, 5, 1, 0, 2),
    (5, 4, 3, 2, 1, 0),
]


def _split_prism(prism):
    """Split a triangular prism into 3 tetrahedra.

    ``prism`` lists the bottom triangle then the top triangle with
    vertex ``k+3`` above vertex ``k``. The split keys every quad-face
    diagonal to the smallest global index on that face, so adjacent
    prisms produce matching triangulations.
    """
    lo = min(range(6), key=lambda k: prism[k])
    v = [prism[_PRISM_ROTATIONS[lo][k]] for k in range(6)]
    if min(v[1], v[5]) < min(v[2], v[4]):
        return [(v[0], v[1], v[2], v[5]),
                (v[0], v[1], v[5], v[4]),
                (v[0], v[4], v[5], v[3])]
    return [(v[0], v[1], v[2], v[4]),
            (v[0], v[4], v[2], v[5]),
            (v[0], v[4], v[5], v[3])]


def build_sphere_ball(refinement, n_shells=None):
    """Icosphere surface plus conforming ball bulk.

    Shell ``l`` scales the unit icosphere by ``l / n_shells``; the outer
    shell is the surface itself. Prisms between shells are split into
    tetrahedra with a shared-face-consistent diagonal rule.
    """
    surface = build_sphere_surface(refinement)
    if n_shells is None:
        n_shells = max(2, 2 ** refinement)
    if n_shells < 2:
        raise InvalidArgumentError("n_shells must be >= 2")
    sverts, sfaces = icosphere(refinement)
    V, L = sverts.shape[0], n_shells

    verts = [np.zeros((1, 3))]
    for l in range(1, L + 1):
        verts.append(sverts * (l / L))
    verts = np.vstack(verts)
    verts[1 + (L - 1) * V:] = surface.vertices

    def shell(l, i):
        return 1 + (l - 1) * V + i

    tets = []
    for a, b, c in sfaces:
        tets.append((0, shell(1, a), shell(1, b), shell(1, c)))
    for l in range(1, L):
        for a, b, c in sfaces:
            prism = (shell(l, a), shell(l, b), shell(l, c),
                     shell(l + 1, a), shell(l + 1, b), shell(l + 1, c))
            tets.extend(_split_prism(prism))
    tets = np.array(tets)
    # orient positively
    p = verts[tets]
    vol6 = np.einsum("ij,ij->i",
                     p[:, 1] - p[:, 0],
                     np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]))
    neg = vol6 < 0
    tets[neg] = tets[neg][:, [0, 1, 3, 2]]

    mass, K, vol = _tet_operators(verts, tets)
    tracemap = np.arange(1 + (L - 1) * V, 1 + L * V)
    bulk = BulkMesh(vertices=verts, cells=tets, mass=mass, stiffness=K,
                    trace=tracemap, volume=vol)
    return surface, bulk
