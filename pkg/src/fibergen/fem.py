"""Degree-1 finite elements for the Laplace-Dirichlet problems.

Scalar fields are ``(n_vertices,)`` arrays and vector fields ``(n_vertices, 3)``
arrays, both in mesh vertex order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConflictingDirichlet, DegenerateCell, NoConvergence, NoDirichlet
from .mesh.core import HEX_GAUSS_POINTS, ElementKind, hex_shape

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    rtol: float = 1e-12
    atol: float = 1e-14
    max_iterations: int | None = None  # None -> 10 * number of unknowns
    preconditioner: str = "jacobi"

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("solver tolerances must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.preconditioner.lower() not in ("jacobi", "none"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass(frozen=True)
class LaplaceProblemSpec:
    """Dirichlet data ``[(vertex_indices, value), ...]``; homogeneous Neumann elsewhere."""

    constraints: tuple

    def __post_init__(self):
        constraints = tuple((np.unique(np.asarray(v, dtype=np.int64)), float(x))
                            for v, x in self.constraints)
        object.__setattr__(self, "constraints", constraints)
        if not any(len(v) for v, _ in constraints):
            raise NoDirichlet("at least one non-empty Dirichlet set is required")

    def dirichlet(self, n_vertices):
        """Boolean mask of constrained vertices and the imposed values."""
        mask = np.zeros(n_vertices, dtype=bool)
        values = np.zeros(n_vertices)
        for vertices, value in self.constraints:
            clash = mask[vertices] & (values[vertices] != value)
            if clash.any():
                v = int(vertices[np.flatnonzero(clash)[0]])
                raise ConflictingDirichlet(
                    f"vertex {v} is constrained to both {values[v]:g} and {value:g}")
            mask[vertices] = True
            values[vertices] = value
        return mask, values


@dataclass(frozen=True)
class SolveInfo:
    iterations: int
    residual: float


def _tet_gradients(vertices, cells):
    x = vertices[cells]
    jac = np.transpose(x[:, 1:] - x[:, :1], (0, 2, 1))  # columns are edge vectors
    det = np.linalg.det(jac)
    if (det <= 0).any():
        raise DegenerateCell(f"cell {int(np.flatnonzero(det <= 0)[0])} has non-positive volume")
    inv = np.linalg.inv(jac)
    ref = np.array([[-1.0, -1.0, -1.0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    return np.einsum("ak,ckj->caj", ref, inv), det / 6.0


def _hex_jacobians(x, dN):
    jac = np.einsum("cai,aj->cij", x, dN)
    det = np.linalg.det(jac)
    if (det <= 0).any():
        raise DegenerateCell(
            f"cell {int(np.flatnonzero(det <= 0)[0])} has a non-positive Jacobian")
    return jac, det


def element_matrices(mesh):
    """Per-cell stiffness matrices, shape ``(n_cells, k, k)``.

    Tets are integrated exactly; hexes with 2x2x2 Gauss points on the
    trilinear map.
    """
    if mesh.kind is ElementKind.TET4:
        grads, vol = _tet_gradients(mesh.vertices, mesh.cells)
        return vol[:, None, None] * np.einsum("cai,cbi->cab", grads, grads)
    x = mesh.vertices[mesh.cells]
    _, dN = hex_shape(HEX_GAUSS_POINTS)
    K = np.zeros((mesh.n_cells, 8, 8))
    for q in range(len(HEX_GAUSS_POINTS)):
        jac, det = _hex_jacobians(x, dN[q])
        dNdx = np.einsum("aj,cji->cai", dN[q], np.linalg.inv(jac))
        K += det[:, None, None] * np.einsum("cai,cbi->cab", dNdx, dNdx)
    return K


def assemble_stiffness(mesh):
    """Global stiffness matrix (CSR), assembled in cell order."""
    K = element_matrices(mesh)
    cells = mesh.cells.astype(np.int32)
    rows = np.broadcast_to(cells[:, :, None], K.shape).ravel()
    cols = np.broadcast_to(cells[:, None, :], K.shape).ravel()
    n = mesh.n_vertices
    A = sp.coo_matrix((K.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    return A


def pcg(A, b, options=SolverOptions(), x0=None):
    """Conjugate gradients with optional Jacobi preconditioning.

    Stops when ``||r|| <= max(rtol * ||b||, atol)``; raises NoConvergence at
    the iteration cap.
    """
    n = b.shape[0]
    max_it = options.max_iterations or max(10 * n, 1)
    if options.preconditioner.lower() == "jacobi":
        inv_diag = 1.0 / A.diagonal()
    else:
        inv_diag = None
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x if x0 is not None else b.copy()
    target = max(options.rtol * np.linalg.norm(b), options.atol)
    rnorm = np.linalg.norm(r)
    if rnorm <= target:
        return x, SolveInfo(0, float(rnorm))
    z = r * inv_diag if inv_diag is not None else r.copy()
    p = z.copy()
    rz = r @ z
    for it in range(1, max_it + 1):
        Ap = A @ p
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            return x, SolveInfo(it, float(rnorm))
        z = r * inv_diag if inv_diag is not None else r
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise NoConvergence(max_it, float(rnorm))


class LaplaceSolver:
    """Assembles the stiffness matrix once and solves any number of Dirichlet problems."""

    def __init__(self, mesh, options=None):
        self.mesh = mesh
        self.options = options or SolverOptions()
        self.A = assemble_stiffness(mesh)
        self.last_info = None

    def solve(self, spec):
        mask, values = spec.dirichlet(self.mesh.n_vertices)
        free = np.flatnonzero(~mask)
        u = values.copy()
        if free.size == 0:
            self.last_info = SolveInfo(0, 0.0)
            return u
        # symmetric elimination: constrained columns move to the right-hand side
        A_free = self.A[free]
        A_ff = A_free[:, free]
        b = -(A_free[:, mask] @ values[mask])
        u[free], self.last_info = pcg(A_ff, b, self.options)
        log.debug("CG: %d iterations, residual %.3e", self.last_info.iterations,
                  self.last_info.residual)
        return u


def solve_laplace(mesh, spec, options=None):
    return LaplaceSolver(mesh, options).solve(spec)


def cell_gradients(mesh, u):
    """Gradient per cell: exact on tets, at the reference centre on hexes."""
    u = np.asarray(u, dtype=float)
    if mesh.kind is ElementKind.TET4:
        grads, _ = _tet_gradients(mesh.vertices, mesh.cells)
        return np.einsum("ca,cai->ci", u[mesh.cells], grads)
    x = mesh.vertices[mesh.cells]
    _, dN = hex_shape(np.zeros((1, 3)))
    jac, _ = _hex_jacobians(x, dN[0])
    dNdx = np.einsum("aj,cji->cai", dN[0], np.linalg.inv(jac))
    return np.einsum("ca,cai->ci", u[mesh.cells], dNdx)


def scatter_to_vertices(mesh, cell_values, weights):
    """Weighted average of per-cell vectors over the cells sharing each vertex."""
    k = mesh.cells.shape[1]
    idx = mesh.cells.ravel()
    w = np.repeat(weights, k)
    total = np.bincount(idx, weights=w, minlength=mesh.n_vertices)
    out = np.empty((mesh.n_vertices, cell_values.shape[1]))
    for d in range(cell_values.shape[1]):
        out[:, d] = np.bincount(idx, weights=w * np.repeat(cell_values[:, d], k),
                                minlength=mesh.n_vertices)
    with np.errstate(invalid="ignore", divide="ignore"):
        out /= total[:, None]
    return np.nan_to_num(out)


def nodal_gradient(mesh, u):
    """Vertex gradients: cell gradients averaged with cell-volume weights."""
    return scatter_to_vertices(mesh, cell_gradients(mesh, u), mesh.cell_volumes())
