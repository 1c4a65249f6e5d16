"""Discrete closed surfaces with mass and stiffness operators.

Two backends share one container:

* ``circle``  - periodic polygon of ``n`` vertices measured by arc length,
  so the total length is exactly ``2*pi*radius`` as assembled.
* ``sphere``  - icosphere obtained by subdividing the icosahedron and
  projecting to the unit sphere; cotangent stiffness weights and
  barycentric lumped mass.

The stiffness matrix is assembled off-diagonal first and the diagonal is
set to minus the row sum, which makes ``K @ 1 == 0`` hold exactly in
floating point for both backends.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .._linalg import solve_spd
from ..errors import InvalidArgumentError


@dataclass
class SurfaceMesh:
    """Discrete closed surface with assembled operators.

    Attributes
    ----------
    backend : str
        ``"circle"`` or ``"sphere"``.
    vertices : ndarray
        Embedded positions, shape (n, 2) or (n, 3).
    elements : ndarray
        Segments (m, 2) or triangles (m, 3).
    mass : ndarray
        Lumped per-vertex weights; sums to ``area``.
    stiffness : scipy.sparse.csr_matrix
        Symmetric PSD, constant vector in the kernel.
    area : float
        Total measure of the surface.
    element_areas : ndarray
        Per-element measure (arc length / triangle area).
    element_normals : ndarray or None
        Outward unit normals per triangle, sphere only.
    grad_basis : ndarray or None
        Per-element P1 basis gradients, shape (m, 3, 3), sphere only.
    radius : float
        Circle radius (1.0 for the sphere backend).
    """

    backend: str
    vertices: np.ndarray
    elements: np.ndarray
    mass: np.ndarray
    stiffness: sp.csr_matrix
    area: float
    element_areas: np.ndarray
    element_normals: np.ndarray = None
    grad_basis: np.ndarray = None
    radius: float = 1.0

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    def element_gradient(self, f):
        """Per-element gradient of a P1 field.

        Returns shape (m,) signed tangential slopes on the circle and
        shape (m, 3) in-plane gradient vectors on the sphere.
        """
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n_vertices,):
            raise InvalidArgumentError(
                "field length %d does not match vertex count %d"
                % (f.size, self.n_vertices))
        if self.backend == "circle":
            i, j = self.elements[:, 0], self.elements[:, 1]
            return (f[j] - f[i]) / self.element_areas
        vals = f[self.elements]                        # (m, 3)
        return np.einsum("ek,eki->ei", vals, self.grad_basis)

    def vertex_normals(self):
        """Outward unit vertex normals (radial for both backends)."""
        v = self.vertices
        return v / np.linalg.norm(v, axis=1)[:, None]


def _offdiag_to_stiffness(n, rows, cols, vals):
    """Build CSR stiffness from off-diagonal entries; diagonal = -row sum."""
    off = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    off.sum_duplicates()
    # enforce exact entrywise symmetry (summation order varies per side)
    off = (off + off.T) * 0.5
    diag = -np.asarray(off.sum(axis=1)).ravel()
    return (off + sp.diags(diag)).tocsr()


def build_circle_surface(n, radius):
    """Periodic arc-length mesh of a circle.

    The element measure is the arc ``2*pi*radius/n`` rather than the
    chord, so the assembled total length is the exact circumference.
    """
    if n < 8:
        raise InvalidArgumentError("circle mesh needs n >= 8, got %d" % n)
    if radius <= 0:
        raise InvalidArgumentError("radius must be positive")
    idx = np.arange(n)
    ang = 2.0 * np.pi * idx / n
    vertices = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    elements = np.column_stack([idx, (idx + 1) % n])
    h = 2.0 * np.pi * radius / n
    mass = np.full(n, h)
    w = np.full(n, -1.0 / h)
    rows = np.concatenate([elements[:, 0], elements[:, 1]])
    cols = np.concatenate([elements[:, 1], elements[:, 0]])
    vals = np.concatenate([w, w])
    K = _offdiag_to_stiffness(n, rows, cols, vals)
    return SurfaceMesh(
        backend="circle",
        vertices=vertices,
        elements=elements,
        mass=mass,
        stiffness=K,
        area=float(mass.sum()),
        element_areas=np.full(n, h),
        radius=radius,
    )


def _icosahedron():
    """Vertices and faces of the unit icosahedron."""
    g = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1.0, g, 0.0], [1.0, g, 0.0], [-1.0, -g, 0.0], [1.0, -g, 0.0],
        [0.0, -1.0, g], [0.0, 1.0, g], [0.0, -1.0, -g], [0.0, 1.0, -g],
        [g, 0.0, -1.0], [g, 0.0, 1.0], [-g, 0.0, -1.0], [-g, 0.0, 1.0],
    ])
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return verts, faces


def icosphere(refinement):
    """Subdivided icosahedron projected to the unit sphere.

    Vertex count is ``10 * 4**refinement + 2``.
    """
    verts, faces = _icosahedron()
    verts = list(verts)
    for _ in range(refinement):
        cache = {}
        new_faces = []

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                p = verts[a] + verts[b]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc],
                          [ab, bc, ca]]
        faces = np.array(new_faces)
    verts = np.array(verts)
    # orient every face outward
    p = verts[faces]
    nrm = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    cent = p.mean(axis=1)
    flip = np.einsum("ij,ij->i", nrm, cent) < 0
    faces[flip] = faces[flip][:, ::-1]
    return verts, faces


def build_sphere_surface(refinement):
    """Icosphere surface mesh with cotangent stiffness."""
    if not (0 <= refinement <= 6):
        raise InvalidArgumentError(
            "refinement must be in [0, 6], got %r" % (refinement,))
    verts, faces = icosphere(refinement)
    n = verts.shape[0]
    p = verts[faces]                                    # (m, 3, 3)
    nrm = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    dbl = np.linalg.norm(nrm, axis=1)
    areas = 0.5 * dbl
    normals = nrm / dbl[:, None]

    rows, cols, vals = [], [], []
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        a = p[:, i] - p[:, k]
        b = p[:, j] - p[:, k]
        cot = np.einsum("ij,ij->i", a, b) / dbl
        w = -0.5 * cot
        rows += [faces[:, i], faces[:, j]]
        cols += [faces[:, j], faces[:, i]]
        vals += [w, w]
    K = _offdiag_to_stiffness(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))

    mass = np.zeros(n)
    np.add.at(mass, faces.ravel(), np.repeat(areas / 3.0, 3))

    # P1 basis gradients: grad(lambda_k) = n x (p_j - p_i) / (2A)
    grad = np.empty((faces.shape[0], 3, 3))
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        grad[:, k, :] = np.cross(normals, p[:, j] - p[:, i]) / dbl[:, None]

    return SurfaceMesh(
        backend="sphere",
        vertices=verts,
        elements=faces,
        mass=mass,
        stiffness=K,
        area=float(mass.sum()),
        element_areas=areas,
        element_normals=normals,
        grad_basis=grad,
    )


def laplace_beltrami_apply(mesh, f):
    """Weak Laplace-Beltrami image ``-M^-1 K f`` (negative semidefinite)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (mesh.n_vertices,):
        raise InvalidArgumentError(
            "field length %d does not match vertex count %d"
            % (f.size, mesh.n_vertices))
    return -(mesh.stiffness @ f) / mesh.mass


def solve_surface_poisson(mesh, g, tol=1e-10, maxiter=10000):
    """Solve ``K psi = -M g`` with zero area-weighted mean.

    ``g`` is projected to mean zero first; a warning is recorded when the
    projection is larger than ``1e-8 * ||g||``.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (mesh.n_vertices,):
        raise InvalidArgumentError(
            "field length %d does not match vertex count %d"
            % (g.size, mesh.n_vertices))
    wmean = float(mesh.mass @ g) / mesh.area
    gn = float(np.linalg.norm(g))
    if abs(wmean) > 1e-8 * max(gn, 1e-300):
        warnings.warn(
            "source projected to mean zero (mean was %.3e)" % wmean,
            RuntimeWarning)
    g0 = g - wmean
    b = -(mesh.mass * g0)
    psi, _ = solve_spd(mesh.stiffness, b,
                       diag=mesh.stiffness.diagonal(),
                       tol=tol, maxiter=maxiter, label="surface_poisson")
    psi -= float(mesh.mass @ psi) / mesh.area
    return psi
