"""Standard icosphere layout reconstruction.

Snapshot files carry per-vertex values but no coordinates; the vertex
order of the simulator's sphere meshes is the canonical subdivided
icosahedron, which this module rebuilds from the vertex count alone.
"""

import numpy as np


def _icosahedron():
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
    """Vertices and outward faces of the canonical subdivided icosphere."""
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
    p = verts[faces]
    nrm = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    cent = p.mean(axis=1)
    flip = np.einsum("ij,ij->i", nrm, cent) < 0
    faces[flip] = faces[flip][:, ::-1]
    return verts, faces


def refinement_for(n_vertices):
    """Refinement level whose icosphere has n_vertices, or None."""
    for r in range(0, 8):
        if 10 * 4 ** r + 2 == n_vertices:
            return r
    return None
