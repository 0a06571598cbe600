"""Cross-mesh fiber comparison: point location, interpolation and angle errors."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import LengthMismatch
from .ldrbm import generate_fibers
from .mesh.core import ElementKind, hex_shape, scale_mesh
from .mesh.generate import generate_slab_mesh
from .mesh.ops import mesh_statistics, refine_hex_uniform

INSIDE_TOL = 1e-10   # in reference coordinates
OUTSIDE_TOL = 1e-8   # times the average cell size


@dataclass(frozen=True, eq=False)
class Interpolation:
    values: np.ndarray
    cell: np.ndarray       # containing cell, -1 where flagged
    outside: np.ndarray    # True where the nearest-vertex fallback was used


def _tet_local(X, p):
    """Barycentric coordinates (m, 4) of points p (m, 3) in tets X (m, 4, 3)."""
    J = np.transpose(X[:, 1:] - X[:, :1], (0, 2, 1))
    lam = np.linalg.solve(J, (p - X[:, 0])[..., None])[..., 0]
    return np.column_stack([1.0 - lam.sum(axis=1), lam])


def _tet_clamp(lam):
    lam = np.clip(lam, 0.0, None)
    return lam / lam.sum(axis=1, keepdims=True)


def _hex_local(X, p, iterations=30):
    """Reference coordinates of p in trilinear hexes by Newton's method."""
    xi = np.zeros_like(p)
    for _ in range(iterations):
        N, dN = hex_shape(xi)
        x = np.einsum("qa,qai->qi", N, X)
        J = np.einsum("qai,qaj->qij", X, dN)
        step = np.linalg.solve(J, (p - x)[..., None])[..., 0]
        xi = np.clip(xi + step, -3.0, 3.0)  # keeps far-away candidates from diverging
        if np.abs(step).max(initial=0.0) < 1e-14:
            break
    return xi


def _weights(kind, X, p):
    """Shape-function weights, inside flags and clamped weights for candidate cells."""
    if kind is ElementKind.TET4:
        lam = _tet_local(X, p)
        inside = (lam >= -INSIDE_TOL).all(axis=1)
        return lam, inside, _tet_clamp(lam)
    xi = _hex_local(X, p)
    inside = (np.abs(xi) <= 1.0 + INSIDE_TOL).all(axis=1)
    return hex_shape(xi)[0], inside, hex_shape(np.clip(xi, -1.0, 1.0))[0]


def locate_and_interpolate(mesh, values, points, k=8):
    """Interpolate nodal ``values`` of ``mesh`` at ``points`` with the cell shape functions.

    Points lying outside every cell by more than 1e-8 times the average cell
    size are flagged and take the value of their nearest vertex. Points that
    coincide with a vertex get that vertex's value unchanged.
    """
    values = np.asarray(values, dtype=float)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    squeeze = values.ndim == 1
    vals = values[:, None] if squeeze else values
    m = len(points)
    out = np.zeros((m, vals.shape[1]))
    cell = np.full(m, -1, dtype=np.int64)
    weights = np.zeros((m, mesh.cells.shape[1]))
    best = np.full(m, np.inf)
    best_cell = np.full(m, -1, dtype=np.int64)
    best_w = np.zeros_like(weights)

    tree = cKDTree(mesh.cell_centroids())
    todo = np.arange(m)
    for kk in (k, 8 * k):
        kk = min(kk, mesh.n_cells)
        if todo.size == 0:
            break
        _, cand = tree.query(points[todo], k=kk)
        cand = cand.reshape(len(todo), kk)
        for r in range(kk):
            if todo.size == 0:
                break
            # rows of ``cand`` follow the order of the current ``todo``
            c = cand[:, r]
            X = mesh.vertices[mesh.cells[c]]
            w, inside, w_clamped = _weights(mesh.kind, X, points[todo])
            hit = todo[inside]
            cell[hit] = c[inside]
            weights[hit] = w[inside]
            miss = ~inside
            x_clamped = np.einsum("qa,qai->qi", w_clamped[miss], X[miss])
            dist = np.linalg.norm(x_clamped - points[todo[miss]], axis=1)
            better = dist < best[todo[miss]]
            idx = todo[miss][better]
            best[idx] = dist[better]
            best_cell[idx] = c[miss][better]
            best_w[idx] = w_clamped[miss][better]
            todo, cand = todo[miss], cand[miss]

    found = cell >= 0
    h_avg = mesh_statistics(mesh).h_avg
    near = ~found & (best <= OUTSIDE_TOL * h_avg)
    cell[near] = best_cell[near]
    weights[near] = best_w[near]
    located = cell >= 0
    out[located] = np.einsum("qa,qac->qc", weights[located], vals[mesh.cells[cell[located]]])

    vtree = cKDTree(mesh.vertices)
    dist, nearest = vtree.query(points)
    outside = ~located
    out[outside] = vals[nearest[outside]]
    exact = dist == 0.0
    out[exact] = vals[nearest[exact]]
    return Interpolation(out[:, 0] if squeeze else out, cell, outside)


@dataclass(frozen=True, eq=False)
class SensitivityReport:
    dtheta: np.ndarray   # degrees, one per reference vertex
    avg_error: float
    max_error: float
    n_points_outside: int = 0

    def summary(self):
        return f"avg_deg={self.avg_error:.6g}\nmax_deg={self.max_error:.6g}"

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex_id", "dtheta_deg"])
            for i, d in enumerate(self.dtheta):
                w.writerow([i, repr(float(d))])


def angle_error(f_coarse_at_ref, f_ref, n_points_outside=0):
    """Line-direction angle in degrees between two vector fields, per vertex.

    Both fields are normalised and |dot| is used, so f and -f compare equal.
    """
    a = np.atleast_2d(np.asarray(f_coarse_at_ref, dtype=float))
    b = np.atleast_2d(np.asarray(f_ref, dtype=float))
    if a.shape != b.shape:
        raise LengthMismatch(f"fields have shapes {a.shape} and {b.shape}")
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        dot = np.abs((a * b).sum(axis=1)) / (na * nb)
    dot = np.clip(np.nan_to_num(dot, nan=1.0), 0.0, 1.0)
    dtheta = np.degrees(np.arccos(dot))
    if dtheta.size == 0:
        return SensitivityReport(dtheta, 0.0, 0.0, n_points_outside)
    return SensitivityReport(dtheta, float(dtheta.mean()), float(dtheta.max()), n_points_outside)


def compare_fields(ref_mesh, f_ref, coarse_mesh, f_coarse):
    """Angle error of a coarse fiber field against a reference, sampled at reference vertices."""
    interp = locate_and_interpolate(coarse_mesh, f_coarse, ref_mesh.vertices)
    return angle_error(interp.values, f_ref, int(interp.outside.sum()))


# --------------------------------------------------------------------------
# slab refinement ladder

@dataclass(frozen=True)
class LadderRow:
    h: float          # average cell size, mm
    dofs: int
    avg_error: float
    max_error: float


HEX_LADDER = dict(extent=(24.0, 24.0, 36.0), divisions=(4, 4, 6), jitter=0.1, steps=(0, 1, 2), ref_steps=3)
TET_LADDER = dict(extent=(24.0, 24.0, 36.0), divisions=(6, 6, 9), levels=(1, 2, 4), ref_level=8)


def slab_ladder(kind, config, params=None):
    """Refinement study of the slab driver against the finest mesh.

    Hex meshes are uniform refinements of one jittered coarse grid, tet
    meshes are structured Kuhn splits with doubled divisions. Lengths are in
    mm; the driver runs on the meshes scaled to metres.
    """
    kind = ElementKind.parse(kind)
    if kind is ElementKind.HEX8:
        p = {**HEX_LADDER, **(params or {})}
        base = generate_slab_mesh(p["extent"], p["divisions"], kind, jitter=p["jitter"], seed=1)
        meshes = [refine_hex_uniform(base, s) for s in (*p["steps"], p["ref_steps"])]
    else:
        p = {**TET_LADDER, **(params or {})}
        meshes = [generate_slab_mesh(p["extent"], tuple(l * d for d in p["divisions"]), kind)
                  for l in (*p["levels"], p["ref_level"])]

    results = [generate_fibers(scale_mesh(m, 1e-3), config) for m in meshes]
    ref_mesh, ref = meshes[-1], results[-1]
    rows = []
    for mesh, res in zip(meshes, results):
        if mesh is ref_mesh:
            report = angle_error(ref.f, ref.f)
        else:
            report = compare_fields(ref_mesh, ref.f, mesh, res.f)
        rows.append(LadderRow(mesh_statistics(mesh).h_avg, mesh.n_vertices,
                              report.avg_error, report.max_error))
    return rows
