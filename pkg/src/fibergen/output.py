"""ASCII VTK unstructured-grid (.vtu) output for fiber fields."""

from __future__ import annotations

import io
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .errors import DisabledOutput, OutputError
from .mesh.core import ElementKind, Mesh

VTK_CELL_TYPE = {ElementKind.TET4: 10, ElementKind.HEX8: 12}
VTK_KIND = {v: k for k, v in VTK_CELL_TYPE.items()}


@dataclass(frozen=True)
class OutputSpec:
    """Where and what to write. ``fields`` limits the point-data arrays; None means all."""

    enabled: bool = True
    filename: str = "fibers"
    fields: tuple | None = None

    def __post_init__(self):
        if self.enabled and not str(self.filename).strip():
            raise OutputError("output filename must be non-empty when output is enabled")

    def path(self, directory="."):
        name = str(self.filename)
        if not name.endswith(".vtu"):
            name += ".vtu"
        return os.path.join(directory, name)


def result_arrays(result):
    """Point-data arrays of a FiberResult by output name, in writing order."""
    arrays = {"fiber_f": result.f, "sheet_s": result.s, "sheet_normal_n": result.n,
              "phi": result.phi}
    arrays.update(result.potentials)
    if result.bundle_id is not None:
        arrays["bundle_id"] = result.bundle_id
    if result.alpha is not None:
        arrays["helical_angle"] = np.broadcast_to(result.alpha, result.phi.shape)
    return arrays


def _ascii(values, integer=False):
    buf = io.StringIO()
    arr = np.asarray(values)
    arr = arr.reshape(arr.shape[0], -1) if arr.ndim > 1 else arr.reshape(-1, 1)
    np.savetxt(buf, arr, fmt="%d" if integer else "%.17g")
    return "\n" + buf.getvalue()


def _data_array(parent, name, values, vtk_type, components=None):
    attrs = {"type": vtk_type}
    if name:
        attrs["Name"] = name
    if components:
        attrs["NumberOfComponents"] = str(components)
    attrs["format"] = "ascii"
    node = ET.SubElement(parent, "DataArray", attrs)
    node.text = _ascii(values, integer=not vtk_type.startswith("Float"))
    return node


def vtu_text(mesh, arrays):
    """Serialise ``mesh`` with the given point-data arrays as a VTU document."""
    root = ET.Element("VTKFile", type="UnstructuredGrid", version="1.0",
                      byte_order="LittleEndian", header_type="UInt64")
    grid = ET.SubElement(root, "UnstructuredGrid")
    piece = ET.SubElement(grid, "Piece", NumberOfPoints=str(mesh.n_vertices),
                          NumberOfCells=str(mesh.n_cells))
    attrs = {}
    if "fiber_f" in arrays:
        attrs["Vectors"] = "fiber_f"
    if "phi" in arrays:
        attrs["Scalars"] = "phi"
    pdata = ET.SubElement(piece, "PointData", attrs)
    for name, values in arrays.items():
        values = np.asarray(values)
        if values.shape[0] != mesh.n_vertices:
            raise OutputError(f"array {name!r} has {values.shape[0]} values for "
                              f"{mesh.n_vertices} points")
        if np.issubdtype(values.dtype, np.integer):
            _data_array(pdata, name, values, "Int32")
        else:
            ncomp = values.shape[1] if values.ndim == 2 else None
            _data_array(pdata, name, values, "Float64", ncomp)
    points = ET.SubElement(piece, "Points")
    _data_array(points, None, mesh.vertices, "Float64", 3)
    cells = ET.SubElement(piece, "Cells")
    k = mesh.cells.shape[1]
    _data_array(cells, "connectivity", mesh.cells.reshape(-1, k), "Int64")
    _data_array(cells, "offsets", k * np.arange(1, mesh.n_cells + 1), "Int64")
    _data_array(cells, "types", np.full(mesh.n_cells, VTK_CELL_TYPE[mesh.kind]), "UInt8")
    ET.indent(root, space="  ")
    return '<?xml version="1.0"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_vtu(mesh, result, spec=OutputSpec(), directory="."):
    """Write ``result`` on ``mesh`` to ``<directory>/<spec.filename>.vtu``; returns the path."""
    if not spec.enabled:
        raise DisabledOutput("output is disabled")
    arrays = result_arrays(result)
    if spec.fields is not None:
        unknown = set(spec.fields) - set(arrays)
        if unknown:
            raise OutputError(f"unknown output fields: {sorted(unknown)}")
        arrays = {k: v for k, v in arrays.items() if k in spec.fields}
    path = spec.path(directory)
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(vtu_text(mesh, arrays))
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None
    return path


@dataclass(frozen=True)
class VtuData:
    points: np.ndarray
    cells: np.ndarray
    cell_types: np.ndarray
    point_data: dict


def _parse_array(node):
    text = (node.text or "").split()
    vtk_type = node.get("type")
    dtype = float if vtk_type.startswith("Float") else np.int64
    values = np.array(text, dtype=dtype)
    ncomp = int(node.get("NumberOfComponents", "1"))
    return values.reshape(-1, ncomp) if ncomp > 1 else values


def read_vtu(path):
    """Read an ASCII VTU written by ``write_vtu`` (single piece, one cell type)."""
    try:
        tree = ET.parse(path)
    except (OSError, ET.ParseError) as exc:
        raise OutputError(f"cannot read {path}: {exc}") from None
    piece = tree.getroot().find("UnstructuredGrid/Piece")
    if piece is None:
        raise OutputError(f"{path} has no UnstructuredGrid piece")
    points = _parse_array(piece.find("Points/DataArray"))
    cell_arrays = {a.get("Name"): _parse_array(a) for a in piece.find("Cells")}
    offsets = cell_arrays["offsets"]
    conn = cell_arrays["connectivity"]
    sizes = np.diff(np.r_[0, offsets])
    if len(sizes) and (sizes != sizes[0]).any():
        raise OutputError(f"{path} mixes cell sizes")
    cells = conn.reshape(len(offsets), -1) if len(offsets) else conn.reshape(0, 0)
    pdata = {a.get("Name"): _parse_array(a) for a in piece.find("PointData")}
    n = int(piece.get("NumberOfPoints"))
    if points.shape[0] != n:
        raise OutputError(f"{path}: header says {n} points, found {points.shape[0]}")
    return VtuData(points, cells, cell_arrays["types"], pdata)


def mesh_from_vtu(data):
    """Rebuild a Mesh (without boundary faces) from ``read_vtu`` output."""
    types = set(data.cell_types.tolist())
    if len(types) != 1 or types.pop() not in VTK_KIND:
        raise OutputError("VTU must contain only tetrahedra or only hexahedra")
    kind = VTK_KIND[int(data.cell_types[0])]
    return Mesh(data.points, data.cells, np.empty((0, kind.nodes_per_face), dtype=np.int64),
                np.empty(0, dtype=np.int64), kind)
