import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fibergen.errors import (
    DanglingIndex,
    EmptyMesh,
    InvalidMesh,
    MixedElementKinds,
    NonPositiveFactor,
    NotHexMesh,
)
from fibergen.mesh import (
    ElementKind,
    Mesh,
    boundary_vertices_with_labels,
    generate_ellipsoidal_lv,
    generate_idealized_atrium,
    generate_slab_mesh,
    generate_spherical_shell,
    hex_to_tet,
    mesh_statistics,
    nearest_vertex,
    refine_hex_uniform,
    scale_mesh,
)
from fibergen.mesh.core import exterior_faces

UNIT_TET = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)


def label_areas(mesh):
    x = mesh.vertices[mesh.faces]
    if mesh.kind is ElementKind.TET4:
        area = 0.5 * np.linalg.norm(np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]), axis=1)
    else:
        area = 0.5 * np.linalg.norm(np.cross(x[:, 2] - x[:, 0], x[:, 3] - x[:, 1]), axis=1)
    return {lab: area[mesh.face_labels == lab].sum() for lab in mesh.labels}


# generate_slab_mesh -------------------------------------------------------

def test_unit_hex_slab():
    m = generate_slab_mesh((1, 1, 1), (1, 1, 1), "hex")
    assert (m.n_cells, m.n_vertices, len(m.faces)) == (1, 8, 6)
    assert sorted(m.face_labels.tolist()) == [10, 20, 50, 60, 70, 70]


def test_unit_tet_slab_has_six_cells():
    m = generate_slab_mesh((1, 1, 1), (1, 1, 1), "tet")
    assert m.n_cells == 6
    assert m.cell_volumes().sum() == pytest.approx(1.0, abs=1e-14)


def test_slab_volume_sums_to_box():
    m = generate_slab_mesh((1.5, 2.0, 0.5), (2, 2, 2), "hex")
    assert abs(m.cell_volumes().sum() - 1.5) < 1e-14


def test_slab_labels_follow_planes():
    m = generate_slab_mesh((2, 3, 4), (2, 3, 2), "tet")
    c = m.vertices[m.faces].mean(axis=1)
    assert np.allclose(c[m.face_labels == 20, 0], 0)
    assert np.allclose(c[m.face_labels == 10, 0], 2)
    assert np.allclose(c[m.face_labels == 50, 2], 4)
    assert np.allclose(c[m.face_labels == 60, 2], 0)


def test_slab_jitter_keeps_boundary_fixed():
    plain = generate_slab_mesh((1, 1, 1), (3, 3, 3), "hex")
    jittered = generate_slab_mesh((1, 1, 1), (3, 3, 3), "hex", jitter=0.2, seed=3)
    on_boundary = np.isin(np.arange(plain.n_vertices), plain.faces)
    assert np.array_equal(plain.vertices[on_boundary], jittered.vertices[on_boundary])
    assert not np.array_equal(plain.vertices, jittered.vertices)
    assert jittered.cell_volumes().sum() == pytest.approx(1.0, abs=1e-13)


# Mesh invariants ----------------------------------------------------------

def test_negative_orientation_is_repaired():
    cells = np.array([[0, 2, 1, 3]])
    m = Mesh(UNIT_TET, cells, np.empty((0, 3)), [], "tet")
    assert m.cell_volumes()[0] == pytest.approx(1 / 6)
    hexes = generate_slab_mesh((1, 1, 1), (2, 1, 1), "hex")
    flipped = hexes.cells.copy()
    flipped[0] = flipped[0][[4, 5, 6, 7, 0, 1, 2, 3]]
    m = Mesh(hexes.vertices, flipped, hexes.faces, hexes.face_labels, "hex")
    assert (m.cell_volumes() > 0).all()


def test_dangling_index_rejected():
    with pytest.raises(DanglingIndex):
        Mesh(UNIT_TET, [[0, 1, 2, 4]], np.empty((0, 3)), [], "tet")


def test_zero_volume_rejected():
    flat = UNIT_TET.copy()
    flat[3] = (0.3, 0.3, 0.0)
    with pytest.raises(InvalidMesh):
        Mesh(flat, [[0, 1, 2, 3]], np.empty((0, 3)), [], "tet")


def test_face_must_belong_to_one_cell():
    m = generate_slab_mesh((1, 1, 1), (2, 1, 1), "tet")
    # an interior face, shared by two tets
    faces, _ = exterior_faces(m.cells, m.kind)
    all_faces = np.sort(m.cells[:, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]].reshape(-1, 3), axis=1)
    keys, counts = np.unique(all_faces, axis=0, return_counts=True)
    interior = keys[counts == 2][0]
    with pytest.raises(InvalidMesh):
        Mesh(m.vertices, m.cells, np.vstack([faces, interior]), np.zeros(len(faces) + 1), "tet")
    with pytest.raises(InvalidMesh):
        Mesh(m.vertices, m.cells, [[0, 1, 2 + m.n_vertices - 3]], [1], "tet")


def test_cell_shape_must_match_kind():
    with pytest.raises(MixedElementKinds):
        Mesh(UNIT_TET, [[0, 1, 2, 3]], np.empty((0, 4)), [], "hex")


def test_mesh_arrays_are_read_only(slab_hex):
    with pytest.raises(ValueError):
        slab_hex.vertices[0, 0] = 1.0


# scale_mesh ---------------------------------------------------------------

def test_scale_millimetres_to_metres():
    m = Mesh(UNIT_TET * 10, [[0, 1, 2, 3]], np.empty((0, 3)), [], "tet")
    assert np.allclose(scale_mesh(m, 1e-3).vertices[1], (0.01, 0, 0))


def test_scale_identity(slab_tet):
    s = scale_mesh(slab_tet, 1)
    assert np.array_equal(s.vertices, slab_tet.vertices)
    assert np.array_equal(s.cells, slab_tet.cells)


def test_scale_doubles_statistics(slab_tet):
    a, b = mesh_statistics(slab_tet), mesh_statistics(scale_mesh(slab_tet, 2))
    assert b.h_min == pytest.approx(2 * a.h_min)
    assert b.h_avg == pytest.approx(2 * a.h_avg)
    assert b.h_max == pytest.approx(2 * a.h_max)
    assert b.quality_max == pytest.approx(a.quality_max)


@pytest.mark.parametrize("factor", [0, -1, float("nan")])
def test_scale_rejects_non_positive(slab_tet, factor):
    with pytest.raises(NonPositiveFactor):
        scale_mesh(slab_tet, factor)


# refine_hex_uniform -------------------------------------------------------

def test_refine_single_hex():
    m = refine_hex_uniform(generate_slab_mesh((1, 1, 1), (1, 1, 1), "hex"), 1)
    assert (m.n_cells, m.n_vertices, len(m.faces)) == (8, 27, 24)


def test_refine_zero_steps_is_identity(slab_hex):
    assert refine_hex_uniform(slab_hex, 0) is slab_hex


def test_refine_twice_counts_and_volume():
    m = refine_hex_uniform(generate_slab_mesh((1, 1, 1), (2, 2, 1), "hex"), 2)
    assert m.n_cells == 4 * 64
    assert abs(m.cell_volumes().sum() - 1.0) < 1e-14


def test_refine_rejects_tets(slab_tet):
    with pytest.raises(NotHexMesh):
        refine_hex_uniform(slab_tet, 1)


def test_refine_keeps_original_vertices(slab_hex):
    m = refine_hex_uniform(slab_hex, 1)
    assert np.array_equal(m.vertices[: slab_hex.n_vertices], slab_hex.vertices)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 2),
       st.floats(0.0, 0.3), st.integers(0, 100))
def test_refine_preserves_volume_and_label_areas(nx, ny, nz, jitter, seed):
    m = generate_slab_mesh((1.0, 2.0, 1.5), (nx, ny, nz), "hex", jitter=jitter, seed=seed)
    r = refine_hex_uniform(m, 1)
    assert r.cell_volumes().sum() == pytest.approx(m.cell_volumes().sum(), rel=1e-12)
    before, after = label_areas(m), label_areas(r)
    for lab in before:
        assert after[lab] == pytest.approx(before[lab], rel=1e-12)
    # conforming: every boundary face of the refined mesh is a labelled face
    faces, _ = exterior_faces(r.cells, r.kind)
    assert len(faces) == len(r.faces)


# boundary_vertices_with_labels -------------------------------------------

def test_boundary_vertices_empty_labels(slab_hex):
    assert boundary_vertices_with_labels(slab_hex, set()).size == 0


def test_boundary_vertices_epi_plane(slab_tet):
    v = boundary_vertices_with_labels(slab_tet, {10})
    expected = np.flatnonzero(np.isclose(slab_tet.vertices[:, 0], 2.0))
    assert np.array_equal(v, expected)


def test_boundary_vertices_unused_label(slab_hex):
    assert np.array_equal(boundary_vertices_with_labels(slab_hex, {20, 999}),
                          boundary_vertices_with_labels(slab_hex, {20}))


@given(st.sets(st.sampled_from([10, 20, 50, 60, 70, 5])),
       st.sets(st.sampled_from([10, 20, 50, 60, 70, 5])))
def test_boundary_vertices_union(a, b):
    m = generate_slab_mesh((1, 1, 1), (2, 2, 2), "tet")
    union = boundary_vertices_with_labels(m, a | b)
    assert np.array_equal(union, np.union1d(boundary_vertices_with_labels(m, a),
                                            boundary_vertices_with_labels(m, b)))


# nearest_vertex -----------------------------------------------------------

def test_nearest_vertex_exact(slab_hex):
    assert nearest_vertex(slab_hex, slab_hex.vertices[7]) == 7


def test_nearest_vertex_tie_goes_to_smallest_index():
    vertices = np.array([[5, 5, 5], [6, 5, 5], [0, 0, 0], [5, 6, 5], [5, 5, 6], [2, 0, 0]], float)
    m = Mesh(vertices, [[0, 1, 3, 4]], np.empty((0, 3)), [], "tet")
    assert nearest_vertex(m, (1, 0, 0)) == 2


def test_nearest_vertex_empty_mesh():
    m = Mesh(np.empty((0, 3)), np.empty((0, 4)), np.empty((0, 3)), [], "tet")
    with pytest.raises(EmptyMesh):
        nearest_vertex(m, (0, 0, 0))


def test_apex_snaps_to_epicardium(lv_mesh):
    # the idealised ventricle stands in for the realistic one
    v = nearest_vertex(lv_mesh, (0, 0, -0.0601846))
    assert v in boundary_vertices_with_labels(lv_mesh, {10})


# mesh_statistics ----------------------------------------------------------

def test_statistics_unit_cube():
    s = mesh_statistics(generate_slab_mesh((1, 1, 1), (1, 1, 1), "hex"))
    assert s.h_min == s.h_avg == s.h_max == 1.0
    assert s.quality_max == 1.0


def test_statistics_regular_tet():
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    s = mesh_statistics(Mesh(v, [[0, 1, 2, 3]], np.empty((0, 3)), [], "tet"))
    assert s.quality_max == pytest.approx(1.0)
    assert s.h_max == pytest.approx(np.sqrt(8))


def test_statistics_edge_ratio_two():
    assert mesh_statistics(generate_slab_mesh((2, 1, 1), (1, 1, 1), "hex")).quality_max == 2.0


def test_statistics_empty_mesh():
    m = Mesh(np.empty((0, 3)), np.empty((0, 8)), np.empty((0, 4)), [], "hex")
    with pytest.raises(EmptyMesh):
        mesh_statistics(m)


def test_statistics_unit_scale(slab_hex):
    assert mesh_statistics(slab_hex, unit_scale=1e3).h_avg == pytest.approx(250.0)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.floats(0, 0.3),
       st.sampled_from(["hex", "tet"]))
def test_statistics_ordering(nx, ny, nz, jitter, kind):
    s = mesh_statistics(generate_slab_mesh((1, 2, 3), (nx, ny, nz), kind, jitter=jitter))
    assert s.h_min <= s.h_avg <= s.h_max
    assert s.quality_max >= 1.0


# hex_to_tet and analytic generators ---------------------------------------

def test_hex_to_tet_conforming(slab_hex):
    t = hex_to_tet(slab_hex)
    assert t.n_cells == 12 * slab_hex.n_cells
    assert t.cell_volumes().sum() == pytest.approx(1.0, abs=1e-13)
    faces, _ = exterior_faces(t.cells, t.kind)
    assert len(faces) == len(t.faces)
    for lab, area in label_areas(slab_hex).items():
        assert label_areas(t)[lab] == pytest.approx(area)


def test_spherical_shell_labels_and_radii():
    m = generate_spherical_shell(0.5, 1.0, 4, 2)
    r = np.linalg.norm(m.vertices, axis=1)
    assert r.min() == pytest.approx(0.5) and r.max() == pytest.approx(1.0)
    assert m.labels == [10, 20]
    assert np.allclose(r[boundary_vertices_with_labels(m, {20})], 0.5)


def test_lv_complete_rings_are_disjoint(lv_complete_mesh):
    mv = boundary_vertices_with_labels(lv_complete_mesh, {50})
    av = boundary_vertices_with_labels(lv_complete_mesh, {60})
    assert mv.size and av.size and np.intersect1d(mv, av).size == 0
    assert lv_complete_mesh.labels == [10, 20, 50, 60, 70]


def test_lv_apex_position(lv_mesh):
    assert lv_mesh.vertices[:, 2].min() == pytest.approx(-0.06)
    assert lv_mesh.vertices[:, 2].max() == pytest.approx(0.0)


def test_atrium_has_all_labels(atrium):
    assert atrium.labels == [10, 20, 30, 40, 50]


@pytest.mark.parametrize("kind", ["hex", "tet"])
def test_generators_both_kinds(kind):
    for m in (generate_spherical_shell(kind=kind), generate_ellipsoidal_lv(n=4, kind=kind),
              generate_idealized_atrium(n=4, kind=kind)):
        assert m.kind is ElementKind.parse(kind)
        assert (m.cell_volumes() > 0).all()


def test_renumbered_mesh_is_same_geometry(slab_tet):
    perm = np.random.default_rng(0).permutation(slab_tet.n_vertices)
    r = slab_tet.renumbered(perm)
    assert np.array_equal(r.vertices[perm], slab_tet.vertices)
    assert r.cell_volumes().sum() == pytest.approx(slab_tet.cell_volumes().sum())
