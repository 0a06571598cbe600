"""Mesh statistics, uniform hexahedral refinement and hex-to-tet conversion."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMesh, NotHexMesh
from .core import ElementKind, Mesh, _cell_edge_lengths, HEX_FACES, row_keys


@dataclass(frozen=True)
class MeshStats:
    h_min: float
    h_avg: float
    h_max: float
    n_elements: int
    n_vertices: int
    quality_max: float

    def as_row(self):
        return (f"{self.h_min:8.3f} {self.h_avg:8.3f} {self.h_max:8.3f} "
                f"{self.n_elements:10d} {self.n_vertices:10d} {self.quality_max:6.2f}")


def mesh_statistics(mesh, unit_scale=1.0):
    """Cell size and edge-ratio summary.

    The size of a cell is its longest edge, quality is longest over shortest
    edge. ``unit_scale`` multiplies lengths, e.g. 1e3 to report millimetres
    for a mesh stored in metres.
    """
    if mesh.n_cells == 0:
        raise EmptyMesh("mesh has no cells")
    lengths = _cell_edge_lengths(mesh.vertices, mesh.cells, mesh.kind) * unit_scale
    longest = lengths.max(axis=1)
    shortest = lengths.min(axis=1)
    return MeshStats(
        h_min=float(longest.min()),
        h_avg=float(np.clip(longest.mean(), longest.min(), longest.max())),
        h_max=float(longest.max()),
        n_elements=mesh.n_cells,
        n_vertices=mesh.n_vertices,
        quality_max=float((longest / shortest).max()),
    )


def _subpoint_corners(ndim):
    """For every node of the 3**ndim subdivision grid, the parent corners it averages.

    Parent corners are listed in Gmsh order (hex for ndim=3, quad for ndim=2).
    """
    if ndim == 3:
        corners = [(0, 0, 0), (2, 0, 0), (2, 2, 0), (0, 2, 0),
                   (0, 0, 2), (2, 0, 2), (2, 2, 2), (0, 2, 2)]
    else:
        corners = [(0, 0), (2, 0), (2, 2), (0, 2)]
    grid = list(itertools.product(range(3), repeat=ndim))
    members = []
    for g in grid:
        members.append([a for a, c in enumerate(corners)
                        if all(gi == 1 or gi == ci for gi, ci in zip(g, c))])
    return grid, corners, members


_HEX_GRID, _HEX_CORNERS, _HEX_MEMBERS = _subpoint_corners(3)
_QUAD_GRID, _QUAD_CORNERS, _QUAD_MEMBERS = _subpoint_corners(2)


def _children(grid, corners):
    index = {g: i for i, g in enumerate(grid)}
    ndim = len(corners[0])
    out = []
    for base in itertools.product(range(2), repeat=ndim):
        out.append([index[tuple(b + c // 2 for b, c in zip(base, corner))] for corner in corners])
    return np.array(out)


_HEX_CHILDREN = _children(_HEX_GRID, _HEX_CORNERS)
_QUAD_CHILDREN = _children(_QUAD_GRID, _QUAD_CORNERS)


def _keys(elems, members):
    """(n_elems * n_sub, 8) keys: sorted parent vertex ids padded with -1."""
    n_sub = len(members)
    keys = np.full((elems.shape[0], n_sub, 8), -1, dtype=np.int64)
    for s, m in enumerate(members):
        keys[:, s, 8 - len(m):] = np.sort(elems[:, m], axis=1)
    return keys.reshape(-1, 8)


def _refine_once(mesh):
    n = mesh.n_vertices
    ckeys = _keys(mesh.cells, _HEX_MEMBERS)
    fkeys = _keys(mesh.faces, _QUAD_MEMBERS)
    allkeys = np.concatenate([ckeys, fkeys])
    _, first, inverse = np.unique(row_keys(allkeys), return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    ukeys = allkeys[first]
    is_corner = (ukeys[:, :7] == -1).all(axis=1)
    new_id = np.empty(len(ukeys), dtype=np.int64)
    new_id[is_corner] = ukeys[is_corner, 7]
    n_new = int((~is_corner).sum())
    new_id[~is_corner] = n + np.arange(n_new)

    mids = ukeys[~is_corner]
    valid = mids >= 0
    coords = (mesh.vertices[np.where(valid, mids, 0)] * valid[..., None]).sum(axis=1)
    coords /= valid.sum(axis=1)[:, None]
    vertices = np.concatenate([mesh.vertices, coords])

    node = new_id[inverse]
    cnode = node[: len(ckeys)].reshape(mesh.n_cells, 27)
    fnode = node[len(ckeys):].reshape(mesh.faces.shape[0], 9)
    cells = cnode[:, _HEX_CHILDREN].reshape(-1, 8)
    faces = fnode[:, _QUAD_CHILDREN].reshape(-1, 4)
    labels = np.repeat(mesh.face_labels, 4)
    return Mesh(vertices, cells, faces, labels, ElementKind.HEX8, validate=False)


def refine_hex_uniform(mesh, n_steps):
    """Split every hexahedron into eight, ``n_steps`` times.

    New vertices sit at edge, face and cell midpoints (averages of the parent
    corners), shared between neighbours. Boundary quads split into four and
    keep their label.
    """
    n_steps = int(n_steps)
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    if n_steps == 0:
        return mesh
    if mesh.kind is not ElementKind.HEX8:
        raise NotHexMesh("uniform refinement is only available for hexahedral meshes")
    for _ in range(n_steps):
        mesh = _refine_once(mesh)
    return mesh


def _split_quads(quads):
    """Split quads into triangles along the diagonal through the smallest vertex id.

    The choice depends only on global ids, so neighbouring cells agree on it.
    """
    start = np.argmin(quads, axis=1) % 2
    q = quads
    a = np.where(start[:, None] == 0, q[:, [0, 1, 2]], q[:, [1, 2, 3]])
    b = np.where(start[:, None] == 0, q[:, [0, 2, 3]], q[:, [1, 3, 0]])
    return a, b


def hex_to_tet(mesh):
    """Convert a hex mesh to a conforming tet mesh (12 tets per hex around its centre)."""
    if mesh.kind is not ElementKind.HEX8:
        raise NotHexMesh("hex_to_tet expects a hexahedral mesh")
    n = mesh.n_vertices
    centers = mesh.cell_centroids()
    vertices = np.concatenate([mesh.vertices, centers])
    quads = mesh.cells[:, HEX_FACES].reshape(-1, 4)
    center_id = np.repeat(n + np.arange(mesh.n_cells), 6)
    a, b = _split_quads(quads)
    tets = np.concatenate([
        np.column_stack([a[:, [0, 2, 1]], center_id]),
        np.column_stack([b[:, [0, 2, 1]], center_id]),
    ])
    fa, fb = _split_quads(mesh.faces)
    faces = np.concatenate([fa, fb])
    labels = np.concatenate([mesh.face_labels, mesh.face_labels])
    return Mesh(vertices, tets, faces, labels, ElementKind.TET4)
