"""Labelled volumetric meshes made of linear tetrahedra or trilinear hexahedra."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..errors import (
    DanglingIndex,
    EmptyMesh,
    InvalidMesh,
    MixedElementKinds,
    NonPositiveFactor,
)


class ElementKind(enum.Enum):
    TET4 = "tet4"
    HEX8 = "hex8"

    @property
    def nodes_per_cell(self):
        return 4 if self is ElementKind.TET4 else 8

    @property
    def nodes_per_face(self):
        return 3 if self is ElementKind.TET4 else 4

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"tet": cls.TET4, "tet4": cls.TET4, "hex": cls.HEX8, "hex8": cls.HEX8}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown element kind {value!r}") from None


# Local numbering follows Gmsh/VTK: hex nodes 0-3 on the bottom face
# (counter-clockwise seen from above), 4-7 above them.
TET_EDGES = np.array([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
HEX_EDGES = np.array(
    [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
     (0, 4), (1, 5), (2, 6), (3, 7)]
)
# outward-oriented for positively oriented cells
TET_FACES = np.array([(0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2)])
HEX_FACES = np.array(
    [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)]
)
HEX_REF_NODES = np.array(
    [(-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
     (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)], dtype=float
)
_GAUSS = 1.0 / np.sqrt(3.0)
HEX_GAUSS_POINTS = np.array(
    [(i, j, k) for k in (-_GAUSS, _GAUSS) for j in (-_GAUSS, _GAUSS) for i in (-_GAUSS, _GAUSS)]
)


def edges_of(kind):
    return TET_EDGES if kind is ElementKind.TET4 else HEX_EDGES


def faces_of(kind):
    return TET_FACES if kind is ElementKind.TET4 else HEX_FACES


def hex_shape(xi):
    """Trilinear shape functions and reference derivatives at points ``xi`` (q, 3).

    Returns ``N`` with shape (q, 8) and ``dN`` with shape (q, 8, 3).
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    s = HEX_REF_NODES
    f = 1.0 + xi[:, None, :] * s[None, :, :]  # (q, 8, 3)
    N = 0.125 * f.prod(axis=2)
    dN = np.empty(f.shape)
    dN[..., 0] = 0.125 * s[None, :, 0] * f[..., 1] * f[..., 2]
    dN[..., 1] = 0.125 * s[None, :, 1] * f[..., 0] * f[..., 2]
    dN[..., 2] = 0.125 * s[None, :, 2] * f[..., 0] * f[..., 1]
    return N, dN


def row_keys(rows):
    """View each row of an integer array as one opaque, sortable key."""
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    return rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()


def _signed_volumes(vertices, cells, kind):
    x = vertices[cells]
    if kind is ElementKind.TET4:
        d = x[:, 1:] - x[:, :1]
        return np.linalg.det(d) / 6.0
    _, dN = hex_shape(HEX_GAUSS_POINTS)
    # J[c, q] = sum_a x[c, a, :] outer dN[q, a, :]
    J = np.einsum("cai,qaj->cqij", x, dN)
    return np.linalg.det(J).sum(axis=1)


def _cell_edge_lengths(vertices, cells, kind):
    e = edges_of(kind)
    return np.linalg.norm(vertices[cells[:, e[:, 1]]] - vertices[cells[:, e[:, 0]]], axis=2)


def _flip(cells, kind, mask):
    cells = cells.copy()
    if kind is ElementKind.TET4:
        cells[mask] = cells[mask][:, [0, 2, 1, 3]]
    else:
        cells[mask] = cells[mask][:, [4, 5, 6, 7, 0, 1, 2, 3]]
    return cells


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable mesh: vertex coordinates, homogeneous cells and labelled boundary faces.

    Negatively oriented cells are repaired on construction by reordering
    their vertices. Labels live on boundary faces only.
    """

    vertices: np.ndarray
    cells: np.ndarray
    faces: np.ndarray
    face_labels: np.ndarray
    kind: ElementKind
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        kind = ElementKind.parse(self.kind)
        vertices = np.array(self.vertices, dtype=float).reshape(-1, 3)
        cells = np.array(self.cells, dtype=np.int64)
        if cells.size == 0:
            cells = cells.reshape(0, kind.nodes_per_cell)
        faces = np.array(self.faces, dtype=np.int64)
        if faces.size == 0:
            faces = faces.reshape(0, kind.nodes_per_face)
        labels = np.array(self.face_labels, dtype=np.int64).reshape(-1)

        if cells.ndim != 2 or cells.shape[1] != kind.nodes_per_cell:
            raise MixedElementKinds(f"{kind.value} mesh given cells of shape {cells.shape}")
        if faces.ndim != 2 or faces.shape[1] != kind.nodes_per_face:
            raise MixedElementKinds(f"{kind.value} mesh given boundary faces of shape {faces.shape}")
        if labels.shape[0] != faces.shape[0]:
            raise InvalidMesh("one label per boundary face required")
        n = vertices.shape[0]
        for name, arr in (("cell", cells), ("face", faces)):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise DanglingIndex(f"{name} references a vertex outside 0..{n - 1}")

        if self.validate and cells.shape[0]:
            vol = _signed_volumes(vertices, cells, kind)
            neg = vol < 0
            if neg.any():
                cells = _flip(cells, kind, neg)
                vol = np.abs(vol)
            h = _cell_edge_lengths(vertices, cells, kind).max(axis=1)
            if (vol <= 1e-12 * h ** 3).any():
                bad = int(np.flatnonzero(vol <= 1e-12 * h ** 3)[0])
                raise InvalidMesh(f"cell {bad} has zero volume")
            if faces.shape[0]:
                _check_faces_on_boundary(cells, faces, kind)

        for name, arr in (("vertices", vertices), ("cells", cells),
                          ("faces", faces), ("face_labels", labels)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "kind", kind)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_cells(self):
        return self.cells.shape[0]

    @property
    def labels(self):
        return sorted(set(self.face_labels.tolist()))

    def cell_volumes(self):
        return _signed_volumes(self.vertices, self.cells, self.kind)

    def cell_centroids(self):
        return self.vertices[self.cells].mean(axis=1)

    def with_vertices(self, vertices):
        return Mesh(vertices, self.cells, self.faces, self.face_labels, self.kind,
                    validate=False)

    def renumbered(self, perm):
        """Return the same mesh with vertex ``i`` moved to position ``perm[i]``."""
        perm = np.asarray(perm)
        vertices = np.empty_like(self.vertices)
        vertices[perm] = self.vertices
        return Mesh(vertices, perm[self.cells], perm[self.faces], self.face_labels,
                    self.kind)


def _check_faces_on_boundary(cells, faces, kind):
    local = faces_of(kind)
    cell_faces = np.sort(cells[:, local].reshape(-1, local.shape[1]), axis=1)
    keys, counts = np.unique(row_keys(cell_faces), return_counts=True)
    bkeys = row_keys(np.sort(faces, axis=1))
    pos = np.searchsorted(keys, bkeys)
    pos = np.clip(pos, 0, len(keys) - 1)
    found = keys[pos] == bkeys
    if not found.all():
        bad = int(np.flatnonzero(~found)[0])
        raise InvalidMesh(f"boundary face {bad} is not a face of any cell")
    if (counts[pos] != 1).any():
        bad = int(np.flatnonzero(counts[pos] != 1)[0])
        raise InvalidMesh(f"boundary face {bad} is shared by two cells")


def exterior_faces(cells, kind):
    """Faces belonging to exactly one cell, oriented outward, with their owner cell."""
    local = faces_of(kind)
    all_faces = cells[:, local].reshape(-1, local.shape[1])
    keys = row_keys(np.sort(all_faces, axis=1))
    _, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    once = counts[inverse.ravel()] == 1
    owner = np.repeat(np.arange(cells.shape[0]), local.shape[0])
    return all_faces[once], owner[once]


def scale_mesh(mesh, factor):
    if not factor > 0:
        raise NonPositiveFactor(f"scaling factor must be positive, got {factor}")
    return mesh.with_vertices(mesh.vertices * float(factor))


def boundary_vertices_with_labels(mesh, labels):
    """Sorted array of vertices lying on boundary faces whose label is in ``labels``."""
    labels = np.fromiter(labels, dtype=np.int64) if not isinstance(labels, np.ndarray) else labels
    if labels.size == 0 or mesh.faces.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    mask = np.isin(mesh.face_labels, labels)
    return np.unique(mesh.faces[mask])


def nearest_vertex(mesh, point):
    """Index of the vertex closest to ``point``; ties go to the smallest index."""
    if mesh.n_vertices == 0:
        raise EmptyMesh("mesh has no vertices")
    d2 = ((mesh.vertices - np.asarray(point, dtype=float)) ** 2).sum(axis=1)
    # argmin returns the first occurrence, which is the tie-break we want
    return int(np.argmin(d2))


def vertex_tree(mesh):
    return cKDTree(mesh.vertices)
