"""Mesh container, Gmsh I/O, refinement and analytic test meshes."""

from .core import (
    ElementKind,
    Mesh,
    boundary_vertices_with_labels,
    exterior_faces,
    nearest_vertex,
    scale_mesh,
)
from .generate import (
    generate_ellipsoidal_lv,
    generate_idealized_atrium,
    generate_slab_mesh,
    generate_spherical_shell,
)
from .gmsh import parse_gmsh, read_gmsh, write_gmsh
from .ops import MeshStats, hex_to_tet, mesh_statistics, refine_hex_uniform

__all__ = [
    "ElementKind",
    "Mesh",
    "MeshStats",
    "boundary_vertices_with_labels",
    "exterior_faces",
    "generate_ellipsoidal_lv",
    "generate_idealized_atrium",
    "generate_slab_mesh",
    "generate_spherical_shell",
    "hex_to_tet",
    "mesh_statistics",
    "nearest_vertex",
    "parse_gmsh",
    "read_gmsh",
    "refine_hex_uniform",
    "scale_mesh",
    "write_gmsh",
]
