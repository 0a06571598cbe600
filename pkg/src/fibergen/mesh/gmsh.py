"""Gmsh MSH reader and writer, ASCII versions 4.1 and 2.2.

Only linear tetrahedra/hexahedra (volume) and triangles/quads (surface) are
meaningful here. Surface elements carry the physical tag of their entity as
label; volume physical tags are read and dropped. Point and line elements
(dimension 0 and 1) are skipped.
"""

from __future__ import annotations

import io
import os

import numpy as np

from ..errors import (
    BinaryFormatUnsupported,
    DanglingIndex,
    MeshFormatError,
    MixedElementKinds,
    UnsupportedElementType,
    UnsupportedVersion,
)
from .core import ElementKind, Mesh

# msh element type -> (dimension, nodes)
_SUPPORTED = {2: (2, 3), 3: (2, 4), 4: (3, 4), 5: (3, 8)}
_LOWER_DIM = {15: 1, 1: 2}
_VOLUME_KIND = {4: ElementKind.TET4, 5: ElementKind.HEX8}
_FACE_TYPE = {ElementKind.TET4: 2, ElementKind.HEX8: 3}
_CELL_TYPE = {ElementKind.TET4: 4, ElementKind.HEX8: 5}


def _sections(text):
    """Map section name -> list of body lines (first occurrence wins)."""
    sections = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("$") and not line.startswith("$End"):
            name = line[1:]
            end = "$End" + name
            j = i + 1
            while j < len(lines) and lines[j].strip() != end:
                j += 1
            if j == len(lines):
                raise MeshFormatError(f"section ${name} is not closed")
            sections.setdefault(name, lines[i + 1:j])
            i = j + 1
        else:
            i += 1
    return sections


def _read_text(source):
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, str):
        return source
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        # binary node/element blocks are not valid utf-8
        head = data[:200].decode("latin-1")
        if "$MeshFormat" in head:
            raise BinaryFormatUnsupported("binary MSH files are not supported") from None
        raise MeshFormatError("input is not a text MSH file") from None


class _Tokens:
    def __init__(self, lines):
        self._it = iter(" ".join(lines).split())

    def __call__(self, n=None):
        try:
            if n is None:
                return next(self._it)
            return [next(self._it) for _ in range(n)]
        except StopIteration:
            raise MeshFormatError("unexpected end of section") from None

    def int(self):
        return int(self())


def parse_gmsh(source):
    """Parse an ASCII MSH 4.1 or 2.2 file given as text, bytes or a file object."""
    text = _read_text(source)
    sections = _sections(text)
    if "MeshFormat" not in sections:
        raise MeshFormatError("missing $MeshFormat section")
    header = " ".join(sections["MeshFormat"]).split()
    if len(header) < 3:
        raise MeshFormatError("malformed $MeshFormat section")
    version, file_type = header[0], header[1]
    if file_type != "0":
        raise BinaryFormatUnsupported("binary MSH files are not supported")
    if version not in ("4.1", "2.2"):
        raise UnsupportedVersion(f"MSH version {version} is not supported (expected 4.1 or 2.2)")
    for name in ("Nodes", "Elements"):
        if name not in sections:
            raise MeshFormatError(f"missing ${name} section")
    if version == "4.1":
        tags, coords, elements = _parse_v41(sections)
    else:
        tags, coords, elements = _parse_v22(sections)
    return _build(tags, coords, elements)


def _parse_v41(sections):
    physical = {}
    if "Entities" in sections:
        tok = _Tokens(sections["Entities"])
        counts = [tok.int() for _ in range(4)]
        for dim, count in enumerate(counts):
            for _ in range(count):
                tag = tok.int()
                tok(3 if dim == 0 else 6)
                n_phys = tok.int()
                phys = [tok.int() for _ in range(n_phys)]
                if dim > 0:
                    tok(tok.int())
                physical[(dim, tag)] = phys[0] if phys else 0

    tok = _Tokens(sections["Nodes"])
    n_blocks, n_nodes = tok.int(), tok.int()
    tok(2)
    tags = np.empty(n_nodes, dtype=np.int64)
    coords = np.empty((n_nodes, 3))
    pos = 0
    for _ in range(n_blocks):
        _dim, _tag, parametric, count = (tok.int() for _ in range(4))
        if parametric:
            raise MeshFormatError("parametric node coordinates are not supported")
        tags[pos:pos + count] = [int(t) for t in tok(count)]
        coords[pos:pos + count] = np.array(tok(3 * count), dtype=float).reshape(count, 3)
        pos += count

    tok = _Tokens(sections["Elements"])
    n_blocks = tok.int()
    tok(3)
    elements = []
    for _ in range(n_blocks):
        dim, ent, etype, count = (tok.int() for _ in range(4))
        if etype in _LOWER_DIM:
            tok(count * (1 + _LOWER_DIM[etype]))
            continue
        if etype not in _SUPPORTED:
            raise UnsupportedElementType(f"MSH element type {etype} is not supported")
        nn = _SUPPORTED[etype][1]
        block = np.array(tok(count * (1 + nn)), dtype=np.int64).reshape(count, 1 + nn)
        elements.append((etype, block[:, 1:], np.full(count, physical.get((dim, ent), 0))))
    return tags, coords, elements


def _parse_v22(sections):
    tok = _Tokens(sections["Nodes"])
    n_nodes = tok.int()
    raw = np.array(tok(4 * n_nodes), dtype=float).reshape(n_nodes, 4)
    tags = raw[:, 0].astype(np.int64)
    coords = raw[:, 1:]

    elements = []
    lines = [ln for ln in sections["Elements"] if ln.strip()]
    n_elem = int(lines[0])
    by_type = {}
    for line in lines[1:1 + n_elem]:
        parts = [int(p) for p in line.split()]
        etype, n_tags = parts[1], parts[2]
        if etype in _LOWER_DIM:
            continue
        if etype not in _SUPPORTED:
            raise UnsupportedElementType(f"MSH element type {etype} is not supported")
        phys = parts[3] if n_tags >= 1 else 0
        nodes = parts[3 + n_tags:]
        if len(nodes) != _SUPPORTED[etype][1]:
            raise MeshFormatError(f"element line has {len(nodes)} nodes for type {etype}")
        by_type.setdefault(etype, ([], []))
        by_type[etype][0].append(nodes)
        by_type[etype][1].append(phys)
    for etype, (nodes, phys) in by_type.items():
        elements.append((etype, np.array(nodes, dtype=np.int64), np.array(phys, dtype=np.int64)))
    return tags, coords, elements


def _build(tags, coords, elements):
    order = np.argsort(tags, kind="stable")
    sorted_tags = tags[order]

    def to_index(node_tags):
        pos = np.searchsorted(sorted_tags, node_tags)
        pos = np.clip(pos, 0, len(sorted_tags) - 1)
        if len(sorted_tags) == 0 or (sorted_tags[pos] != node_tags).any():
            raise DanglingIndex("element references an undefined node tag")
        return order[pos]

    volume_types = {et for et, _, _ in elements if _SUPPORTED[et][0] == 3}
    surface_types = {et for et, _, _ in elements if _SUPPORTED[et][0] == 2}
    if not volume_types:
        raise MeshFormatError("no volume elements found")
    if len(volume_types) > 1:
        raise MixedElementKinds("mesh mixes tetrahedra and hexahedra")
    kind = _VOLUME_KIND[volume_types.pop()]
    if surface_types - {_FACE_TYPE[kind]}:
        raise MixedElementKinds(f"{kind.value} mesh contains surface elements of another shape")

    cells = [to_index(nodes) for et, nodes, _ in elements if et == _CELL_TYPE[kind]]
    faces = [to_index(nodes) for et, nodes, _ in elements if et == _FACE_TYPE[kind]]
    labels = [phys for et, _, phys in elements if et == _FACE_TYPE[kind]]
    nf = kind.nodes_per_face
    return Mesh(
        coords,
        np.concatenate(cells),
        np.concatenate(faces) if faces else np.empty((0, nf), dtype=np.int64),
        np.concatenate(labels) if labels else np.empty(0, dtype=np.int64),
        kind,
    )


def read_gmsh(path):
    with open(path, "rb") as fh:
        return parse_gmsh(fh.read())


def _fmt(x):
    return repr(float(x))


def write_gmsh(mesh, target=None, version="4.1"):
    """Serialise ``mesh`` as ASCII MSH; returns the text when ``target`` is None.

    Each distinct face label becomes one surface entity with a physical tag
    equal to the label; cells go to a single volume entity.
    """
    if version not in ("4.1", "2.2"):
        raise UnsupportedVersion(f"cannot write MSH version {version}")
    out = io.StringIO()
    w = out.write
    nv = mesh.n_vertices
    labels = mesh.labels
    ctype, ftype = _CELL_TYPE[mesh.kind], _FACE_TYPE[mesh.kind]
    if version == "4.1":
        w("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n")
        lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
        box = " ".join(_fmt(v) for v in (*lo, *hi))
        w("$Entities\n")
        w(f"0 0 {len(labels)} 1\n")
        for i, lab in enumerate(labels, start=1):
            w(f"{i} {box} 1 {lab} 0\n")
        w(f"1 {box} 0 {len(labels)} " + " ".join(str(i) for i in range(1, len(labels) + 1)) + "\n")
        w("$EndEntities\n")
        w(f"$Nodes\n1 {nv} 1 {nv}\n3 1 0 {nv}\n")
        w("".join(f"{i}\n" for i in range(1, nv + 1)))
        w("".join(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}\n" for x, y, z in mesh.vertices))
        w("$EndNodes\n")
        n_el = mesh.n_cells + mesh.faces.shape[0]
        # one block per run of equal labels keeps the face order intact
        fl = mesh.face_labels
        starts = np.flatnonzero(np.r_[True, fl[1:] != fl[:-1]]) if len(fl) else np.array([], int)
        ends = np.r_[starts[1:], len(fl)]
        entity = {lab: i for i, lab in enumerate(labels, start=1)}
        w(f"$Elements\n{len(starts) + 1} {n_el} 1 {n_el}\n")
        tag = 1
        for a, b in zip(starts, ends):
            w(f"2 {entity[fl[a]]} {ftype} {b - a}\n")
            for row in mesh.faces[a:b] + 1:
                w(f"{tag} " + " ".join(map(str, row)) + "\n")
                tag += 1
        w(f"3 1 {ctype} {mesh.n_cells}\n")
        for row in mesh.cells + 1:
            w(f"{tag} " + " ".join(map(str, row)) + "\n")
            tag += 1
        w("$EndElements\n")
    else:
        w("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        w(f"$Nodes\n{nv}\n")
        w("".join(f"{i} {_fmt(x)} {_fmt(y)} {_fmt(z)}\n"
                  for i, (x, y, z) in enumerate(mesh.vertices, start=1)))
        w("$EndNodes\n")
        n_el = mesh.n_cells + mesh.faces.shape[0]
        w(f"$Elements\n{n_el}\n")
        tag = 1
        for row, lab in zip(mesh.faces + 1, mesh.face_labels):
            w(f"{tag} {ftype} 2 {lab} {lab} " + " ".join(map(str, row)) + "\n")
            tag += 1
        for row in mesh.cells + 1:
            w(f"{tag} {ctype} 2 0 1 " + " ".join(map(str, row)) + "\n")
            tag += 1
        w("$EndElements\n")
    text = out.getvalue()
    if target is None:
        return text
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w") as fh:
            fh.write(text)
    else:
        target.write(text)
    return target
