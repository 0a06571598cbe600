"""Myocardial fiber generation with Laplace-Dirichlet rule-based methods."""

from .errors import FiberGenError
from .fem import LaplaceProblemSpec, SolverOptions, assemble_stiffness, nodal_gradient, solve_laplace
from .ldrbm import AngleSet, FiberResult, GeometryConfig, GeometryKind, generate_fibers
from .mesh import Mesh, read_gmsh

__all__ = [
    "AngleSet",
    "FiberGenError",
    "FiberResult",
    "GeometryConfig",
    "GeometryKind",
    "LaplaceProblemSpec",
    "Mesh",
    "SolverOptions",
    "assemble_stiffness",
    "generate_fibers",
    "nodal_gradient",
    "read_gmsh",
    "solve_laplace",
]
