from .surface import (SurfaceMesh, build_circle_surface,
                      build_sphere_surface, icosphere,
                      laplace_beltrami_apply, solve_surface_poisson)
from .bulk import BulkMesh, build_circle_disk, build_sphere_ball
from .atlas import ChartAtlas, build_atlas, mollify
from .interface import extract_interface, geodesic_curvature

__all__ = [
    "SurfaceMesh", "BulkMesh", "ChartAtlas",
    "build_circle_surface", "build_sphere_surface", "icosphere",
    "build_circle_disk", "build_sphere_ball",
    "laplace_beltrami_apply", "solve_surface_poisson",
    "build_atlas", "mollify",
    "extract_interface", "geodesic_curvature",
]
