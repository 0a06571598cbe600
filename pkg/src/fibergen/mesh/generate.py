"""Small analytic meshes: slabs, spherical shells, idealised ventricles and atria.

All generators return meshes in whatever length unit the caller uses for the
extents and radii; none of them scale.
"""

from __future__ import annotations

import numpy as np

from .core import ElementKind, Mesh, exterior_faces
from .ops import hex_to_tet

SLAB_LABELS = {"endo": 20, "epi": 10, "base_up": 50, "base_down": 60, "side": 70}
SHELL_LABELS = {"endo": 20, "epi": 10}
LV_LABELS = {"endo": 20, "epi": 10, "base": 50, "mv": 50, "av": 60, "gap": 70}
ATRIUM_LABELS = {"endo": 10, "epi": 30, "rpv": 20, "lpv": 50, "mv": 40}

# Freudenthal split of the unit cube along its 0-6 diagonal; conforming on
# any structured grid because every cube is split the same way.
_KUHN = np.array([(0, 1, 2, 6), (0, 2, 3, 6), (0, 3, 7, 6),
                  (0, 7, 4, 6), (0, 4, 5, 6), (0, 5, 1, 6)])


def _grid_hexes(nx, ny, nz):
    def vid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    i, j, k = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    i, j, k = i.ravel(order="F"), j.ravel(order="F"), k.ravel(order="F")
    return np.column_stack([
        vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k),
        vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1),
    ])


def generate_slab_mesh(extent=(1.0, 1.0, 1.0), divisions=(1, 1, 1), kind=ElementKind.HEX8,
                       labels=None, jitter=0.0, seed=0):
    """Box ``[0,Lx]x[0,Ly]x[0,Lz]`` split into ``divisions`` hexes (or 6 tets each).

    Boundary labels: x=0 endo (20), x=Lx epi (10), z=Lz base up (50),
    z=0 base down (60), y=0 and y=Ly side (70).

    ``jitter`` moves strictly interior vertices by up to that fraction of the
    local grid spacing, independently per axis; boundary vertices stay put.
    """
    kind = ElementKind.parse(kind)
    labels = {**SLAB_LABELS, **(labels or {})}
    Lx, Ly, Lz = (float(v) for v in extent)
    nx, ny, nz = (int(v) for v in divisions)
    if min(nx, ny, nz) < 1:
        raise ValueError("divisions must be >= 1")
    if min(Lx, Ly, Lz) <= 0:
        raise ValueError("extent must be positive")

    xs, ys, zs = np.linspace(0, Lx, nx + 1), np.linspace(0, Ly, ny + 1), np.linspace(0, Lz, nz + 1)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    vertices = np.column_stack([X.ravel(order="F"), Y.ravel(order="F"), Z.ravel(order="F")])
    if jitter:
        rng = np.random.default_rng(seed)
        spacing = np.array([Lx / nx, Ly / ny, Lz / nz])
        tol = 1e-12 * max(Lx, Ly, Lz)
        interior = ((vertices > tol) & (vertices < np.array([Lx, Ly, Lz]) - tol)).all(axis=1)
        shift = rng.uniform(-jitter, jitter, size=(int(interior.sum()), 3)) * spacing
        vertices[interior] += shift

    hexes = _grid_hexes(nx, ny, nz)
    cells = hexes if kind is ElementKind.HEX8 else hexes[:, _KUHN].reshape(-1, 4)
    faces, _ = exterior_faces(cells, kind)
    c = vertices[faces].mean(axis=1)
    tol = 1e-9 * max(Lx, Ly, Lz)
    face_labels = np.full(len(faces), labels["side"], dtype=np.int64)
    face_labels[np.abs(c[:, 2]) < tol] = labels["base_down"]
    face_labels[np.abs(c[:, 2] - Lz) < tol] = labels["base_up"]
    face_labels[np.abs(c[:, 0]) < tol] = labels["endo"]
    face_labels[np.abs(c[:, 0] - Lx) < tol] = labels["epi"]
    return Mesh(vertices, cells, faces, face_labels, kind)


def _cube_surface(n, hemisphere):
    """Lattice points and quads of the cube surface {0..n}^3, mapped to the unit sphere."""
    if hemisphere and n % 2:
        raise ValueError("hemisphere needs an even resolution")
    top = n // 2 if hemisphere else n
    index = {}
    points = []
    for i in range(n + 1):
        for j in range(n + 1):
            for k in range(top + 1):
                if min(i, j, k) == 0 or max(i, j, k) == n:
                    index[(i, j, k)] = len(points)
                    points.append((i, j, k))
    g = np.array(points, dtype=float)
    c = np.tan(0.25 * np.pi * (2.0 * g / n - 1.0))  # equiangular projection
    directions = c / np.linalg.norm(c, axis=1)[:, None]

    quads = []
    for axis in range(3):
        b, d = [a for a in range(3) if a != axis]
        for side in (0, n):
            for p in range(n):
                for q in range(n):
                    corner = []
                    for dp, dq in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        pt = [0, 0, 0]
                        pt[axis], pt[b], pt[d] = side, p + dp, q + dq
                        corner.append(tuple(pt))
                    if all(pt in index for pt in corner):
                        quads.append([index[pt] for pt in corner])
    return directions, np.array(quads, dtype=np.int64)


def _shell(r_inner, r_outer, n, n_layers, hemisphere=False, z_scale=1.0, holes=()):
    directions, quads = _cube_surface(n, hemisphere)
    keep = np.ones(len(quads), dtype=bool)
    for axis, half_angle, _ in holes:
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        centre = directions[quads].mean(axis=1)
        centre /= np.linalg.norm(centre, axis=1)[:, None]
        keep &= centre @ axis < np.cos(np.radians(half_angle))
    quads = quads[keep]

    ns = len(directions)
    radii = np.linspace(r_inner, r_outer, n_layers + 1)
    vertices = np.concatenate([directions * r for r in radii])
    vertices[:, 2] *= z_scale
    layer = np.repeat(np.arange(n_layers + 1), ns)
    cells = np.concatenate([
        np.column_stack([quads + l * ns, quads + (l + 1) * ns]) for l in range(n_layers)
    ])
    faces, _ = exterior_faces(cells, ElementKind.HEX8)
    flayer = layer[faces]
    inner = (flayer == 0).all(axis=1)
    outer = (flayer == n_layers).all(axis=1)
    return vertices, cells, faces, inner, outer


def _finish(vertices, cells, faces, labels, kind):
    vertices, (cells, faces) = _compact_pair(vertices, cells, faces)
    mesh = Mesh(vertices, cells, faces, labels, ElementKind.HEX8)
    return mesh if ElementKind.parse(kind) is ElementKind.HEX8 else hex_to_tet(mesh)


def _compact_pair(vertices, cells, faces):
    used = np.unique(cells)
    remap = np.full(len(vertices), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return vertices[used], (remap[cells], remap[faces])


def generate_spherical_shell(r_inner=0.5, r_outer=1.0, n=4, n_layers=2, kind=ElementKind.HEX8,
                             labels=None):
    """Concentric spherical shell from a cubed sphere; inner surface endo (20), outer epi (10).

    ``n`` cells per cube-face edge, ``n_layers`` cells through the wall.
    """
    labels = {**SHELL_LABELS, **(labels or {})}
    vertices, cells, faces, inner, outer = _shell(r_inner, r_outer, n, n_layers)
    face_labels = np.where(inner, labels["endo"], labels["epi"])
    return _finish(vertices, cells, faces, face_labels, kind)


def generate_ellipsoidal_lv(r_inner=0.02, r_outer=0.03, z_scale=2.0, n=8, n_layers=2,
                            kind=ElementKind.TET4, complete=False, labels=None):
    """Truncated prolate shell (half-ellipsoid below z=0) standing in for a left ventricle.

    The flat base at z=0 carries the base label (50). With ``complete`` the
    base ring is split into a mitral sector (50), an aortic sector (60) and
    two separating gaps (70) so the two valve rings share no vertex. The apex
    is the epicardial point ``(0, 0, -z_scale * r_outer)``.
    """
    labels = {**LV_LABELS, **(labels or {})}
    vertices, cells, faces, inner, outer = _shell(
        r_inner, r_outer, n, n_layers, hemisphere=True, z_scale=z_scale)
    face_labels = np.full(len(faces), labels["base"], dtype=np.int64)
    face_labels[inner] = labels["endo"]
    face_labels[outer] = labels["epi"]
    if complete:
        base = ~(inner | outer)
        c = vertices[faces].mean(axis=1)
        theta = np.degrees(np.arctan2(c[:, 1], c[:, 0]))
        mv = (theta >= -130) & (theta <= 70)
        av = (theta >= 100) | (theta <= -160)
        face_labels[base] = labels["gap"]
        face_labels[base & mv] = labels["mv"]
        face_labels[base & av] = labels["av"]
    return _finish(vertices, cells, faces, face_labels, kind)


ATRIUM_HOLES = (
    ((0.0, 0.0, -1.0), 35.0, "mv"),
    ((np.sin(np.radians(50)), 0.0, np.cos(np.radians(50))), 22.0, "lpv"),
    ((-np.sin(np.radians(50)), 0.0, np.cos(np.radians(50))), 22.0, "rpv"),
)


def generate_idealized_atrium(r_inner=0.02, r_outer=0.023, n=8, n_layers=1,
                              kind=ElementKind.TET4, labels=None, holes=ATRIUM_HOLES):
    """Hollow sphere with a mitral opening at the bottom and two pulmonary-vein openings.

    Opening rims are labelled by the nearest opening axis; labels default to
    endo 10, epi 30, RPV 20, LPV 50, MV 40.
    """
    labels = {**ATRIUM_LABELS, **(labels or {})}
    vertices, cells, faces, inner, outer = _shell(
        r_inner, r_outer, n, n_layers, holes=holes)
    face_labels = np.where(inner, labels["endo"], labels["epi"]).astype(np.int64)
    rim = ~(inner | outer)
    c = vertices[faces[rim]].mean(axis=1)
    c /= np.linalg.norm(c, axis=1)[:, None]
    axes = np.array([np.asarray(a) / np.linalg.norm(a) for a, _, _ in holes])
    nearest = np.argmax(c @ axes.T, axis=1)
    face_labels[rim] = np.array([labels[name] for _, _, name in holes])[nearest]
    return _finish(vertices, cells, faces, face_labels, kind)
