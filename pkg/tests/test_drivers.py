import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibergen.errors import (
    EmptyBoundarySet,
    LabelRoleMissing,
    MissingApex,
    OverlappingRings,
    ParameterError,
    ZeroVector,
)
from fibergen.fem import nodal_gradient
from fibergen.ldrbm import (
    BUNDLE_AB,
    BUNDLE_LPV,
    BUNDLE_MV,
    BUNDLE_RPV,
    AngleSet,
    GeometryConfig,
    GeometryKind,
    atrial_normals,
    build_frame,
    classify_bundles,
    generate_fibers,
    helical_angle,
    normal_bt,
    normal_doste,
    normal_rl,
)
from fibergen.ldrbm.normals import _Context, farthest_vertex
from fibergen.mesh import boundary_vertices_with_labels, generate_slab_mesh, scale_mesh

from conftest import (
    SLAB_LABELS,
    atrium_config,
    driver_cases,
    frame_errors,
    lv_complete_config,
    lv_config,
    slab_config,
    sphere_config,
)

CASES = driver_cases()
IDS = [name for name, _, _ in CASES]


@pytest.fixture(scope="module", params=CASES, ids=IDS)
def case(request):
    name, make_mesh, make_config = request.param
    mesh = make_mesh()
    config = make_config(1.0)
    return name, mesh, make_config, generate_fibers(mesh, config)


def interior(mesh):
    return np.setdiff1d(np.arange(mesh.n_vertices), mesh.faces.ravel())


# properties shared by every driver ----------------------------------------------

def test_frames_orthonormal(case):
    _, _, _, res = case
    orth, det = frame_errors(res.f, res.n, res.s)
    assert orth <= 1e-10 and det <= 1e-10


def test_sheet_leaves_transmural_by_beta(case):
    name, _, _, res = case
    if res.beta is None or name == "sphere":
        return
    cos = np.einsum("ij,ij->i", res.s, res.e_t)
    assert (cos >= np.cos(np.radians(np.abs(res.beta))) - 1e-9).all()


def test_phi_bounds(case):
    _, _, _, res = case
    assert res.phi.min() >= -1e-8 and res.phi.max() <= 1 + 1e-8


def test_scaling_invariance(case):
    name, mesh, make_config, res = case
    big = generate_fibers(scale_mesh(mesh, 10.0), make_config(10.0))
    for a, b in ((res.f, big.f), (res.n, big.n), (res.s, big.s)):
        assert np.abs(a - b).max() <= 1e-9, name


def test_renumbering_invariance(case):
    name, mesh, make_config, res = case
    perm = np.random.default_rng(1).permutation(mesh.n_vertices)
    other = generate_fibers(mesh.renumbered(perm), make_config(1.0))
    for a, b in ((res.f, other.f), (res.n, other.n), (res.s, other.s)):
        assert np.abs(a - b[perm]).max() <= 1e-9, name


def test_report_records_solves(case):
    _, _, _, res = case
    names = [s[0] for s in res.report.solves]
    assert names[0] == "phi"
    assert all(res_ < 1e-6 for _, _, res_ in res.report.solves)
    assert res.report.lines()[0].startswith("degenerate transmural")


# slab ------------------------------------------------------------------------------

def test_slab_helical_law():
    m = generate_slab_mesh((1, 1, 1), (4, 4, 4), "hex", jitter=0.2, seed=5)
    res = generate_fibers(m, slab_config())
    inner = interior(m)
    measured = helical_angle(res.f, res.e_l, res.e_n)[inner]
    assert np.abs(measured - res.alpha[inner]).max() < 1.0
    assert np.abs(res.alpha - (60 - 120 * m.vertices[:, 0])).max() < 1e-8


def test_slab_wall_angles():
    m = generate_slab_mesh((1, 1, 1), (3, 3, 3), "tet")
    res = generate_fibers(m, slab_config())
    h = helical_angle(res.f, res.e_l, res.e_n)
    assert np.allclose(h[boundary_vertices_with_labels(m, {20})], 60, atol=1e-6)
    assert np.allclose(h[boundary_vertices_with_labels(m, {10})], -60, atol=1e-6)


def test_slab_frame_axes():
    m = generate_slab_mesh((1, 1, 1), (3, 3, 3), "hex")
    res = generate_fibers(m, slab_config(AngleSet()))
    assert np.allclose(res.e_t, [1, 0, 0], atol=1e-10)
    assert np.allclose(res.e_n, [0, 0, 1], atol=1e-10)
    assert np.allclose(res.f, res.e_l)
    assert set(res.potentials) == {"psi"}


def test_slab_bt_normal_points_to_base():
    m = generate_slab_mesh((1, 1, 2), (2, 2, 6), "tet", jitter=0.2, seed=9)
    k, psi = normal_bt(m, {50}, apex=(0, 0, 0))
    assert psi.min() >= -1e-10 and psi.max() <= 1 + 1e-10
    assert np.allclose(psi[boundary_vertices_with_labels(m, {50})], 1.0)
    mid = np.abs(m.vertices[:, 2] - 1.0) < 0.4
    assert (k[mid, 2] > 0).mean() > 0.95


def test_far_apex_is_snapped_and_logged(caplog):
    m = generate_slab_mesh((1, 1, 1), (2, 2, 2), "hex")
    ctx = _Context(m)
    with caplog.at_level("INFO"):
        normal_bt(m, {50}, apex=(5, 5, -100), ctx=ctx)
    role, requested, v, coord = ctx.report.snapped_points[0]
    assert role == "apex" and requested == (5.0, 5.0, -100.0)
    assert coord == (1.0, 1.0, 0.0)
    assert "snapped" in caplog.text


# sphere --------------------------------------------------------------------------------

def test_radial_sphere_fibers(shell):
    res = generate_fibers(shell, sphere_config(radial=True))
    inner = interior(shell)
    r_hat = shell.vertices / np.linalg.norm(shell.vertices, axis=1)[:, None]
    assert (np.einsum("ij,ij->i", res.f, r_hat)[inner] >= 0.99).all()


def test_non_radial_sphere_fibers_are_tangential(shell):
    res = generate_fibers(shell, sphere_config(radial=False))
    r_hat = shell.vertices / np.linalg.norm(shell.vertices, axis=1)[:, None]
    assert np.abs(np.einsum("ij,ij->i", res.f, r_hat)[interior(shell)]).max() < 0.1


# ventricle -------------------------------------------------------------------------------

def test_rl_normal_is_constant(lv_mesh):
    k = normal_rl(lv_mesh, (0, 0, 2))
    assert np.array_equal(k, np.tile([0.0, 0, 2], (lv_mesh.n_vertices, 1)))
    with pytest.raises(ZeroVector):
        normal_rl(lv_mesh, (0, 0, 0))


def test_rl_normal_scale_does_not_matter(lv_mesh):
    grad = np.random.default_rng(0).normal(size=(lv_mesh.n_vertices, 3))
    a = build_frame(grad, normal_rl(lv_mesh, (0, 0, 1)))
    b = build_frame(grad, normal_rl(lv_mesh, (0, 0, 2)))
    assert np.array_equal(a.e_n, b.e_n)


def test_doste_endpoints(lv_complete_mesh):
    m = lv_complete_mesh
    k, w, psi_ab, psi_ot = normal_doste(m, {50}, {60}, (0, 0, -0.06))
    g_ab, g_ot = nodal_gradient(m, psi_ab), nodal_gradient(m, psi_ot)
    mv = boundary_vertices_with_labels(m, {50})
    av = boundary_vertices_with_labels(m, {60})
    assert np.allclose(w[mv], 1.0) and np.allclose(w[av], 0.0)
    assert np.allclose(k[mv], g_ab[mv]) and np.allclose(k[av], g_ot[av])
    bound = np.maximum(np.linalg.norm(g_ab, axis=1), np.linalg.norm(g_ot, axis=1))
    assert (np.linalg.norm(k, axis=1) <= bound * (1 + 1e-12)).all()


def test_doste_rejects_overlapping_rings(lv_complete_mesh):
    with pytest.raises(OverlappingRings):
        normal_doste(lv_complete_mesh, {50, 70}, {60, 70}, (0, 0, -0.06))


def test_complete_lv_outflow_angles(lv_complete_mesh):
    res = generate_fibers(lv_complete_mesh, lv_complete_config())
    av = boundary_vertices_with_labels(lv_complete_mesh, {60})
    # on the aortic ring w = 0, so the outflow endpoints apply
    expected = 90 * (1 - np.clip(res.phi[av], 0, 1))
    assert np.allclose(res.alpha[av], expected, atol=1e-9)
    assert set(res.potentials) == {"psi_ab", "psi_ot", "w"}


def test_empty_boundary_set(lv_mesh):
    config = GeometryConfig(GeometryKind.LV_BASED, {"endo": 20, "epi": 10, "base": 99},
                            apex=(0, 0, -0.06))
    with pytest.raises(EmptyBoundarySet) as exc:
        generate_fibers(lv_mesh, config)
    assert exc.value.exit_code == 2


# atrium --------------------------------------------------------------------------------

def test_atrium_frame_is_unrotated(atrium):
    res = generate_fibers(atrium, atrium_config())
    assert res.f is res.e_l and res.n is res.e_n and res.s is res.e_t
    assert res.alpha is None and res.beta is None


def test_atrium_has_four_bundles(atrium):
    res = generate_fibers(atrium, atrium_config(tau_mv=0.65, tau_lpv=0.85, tau_rpv=0.15))
    counts = np.bincount(res.bundle_id, minlength=4)
    assert (counts > 0).all(), counts
    assert set(res.potentials) == {"psi_ab", "psi_v", "psi_r"}


def test_mitral_vertices_are_mitral_bundle(atrium):
    res = generate_fibers(atrium, atrium_config())
    assert (res.bundle_id[boundary_vertices_with_labels(atrium, {40})] == BUNDLE_MV).all()


def test_extreme_taus_leave_only_apicobasal(atrium):
    res = generate_fibers(atrium, atrium_config(tau_mv=1.0, tau_lpv=1.0, tau_rpv=0.0))
    assert (res.bundle_id == BUNDLE_AB).all()


def test_bundle_normals_agree_with_apicobasal_on_average(atrium):
    ctx = _Context(atrium)
    k, bundle, psi_ab, _, _ = atrial_normals(atrium, atrium_config(), ctx)
    g_ab = nodal_gradient(atrium, psi_ab)
    for b in (BUNDLE_MV, BUNDLE_LPV, BUNDLE_RPV):
        sel = bundle == b
        assert (k[sel] * g_ab[sel]).sum() >= 0


def test_appendage_apex_at_default_tip_reproduces_default(atrium):
    default = generate_fibers(atrium, atrium_config())
    tip = farthest_vertex(atrium, boundary_vertices_with_labels(atrium, {40}))
    res = generate_fibers(atrium, atrium_config(appendage=True, apex=tuple(atrium.vertices[tip])))
    assert res.report.snapped_points[0][0] == "appendage apex"
    assert res.potentials["psi_ab"][tip] == 0.0
    assert np.array_equal(res.f, default.f)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=60)
def test_classification_order(t_mv, t_lpv, t_rpv):
    rng = np.random.default_rng(3)
    psi_r, psi_v = rng.uniform(size=200), rng.uniform(size=200)
    b = classify_bundles(psi_r, psi_v, t_mv, t_lpv, t_rpv)
    if t_mv < 1:
        assert (b[psi_r >= t_mv] == BUNDLE_MV).all()
    rest = psi_r < t_mv
    if t_lpv < 1:
        assert (b[rest & (psi_v >= t_lpv)] == BUNDLE_LPV).all()
    assert (b[rest & (psi_v < t_lpv) & (psi_v > t_rpv)] == BUNDLE_AB).all()


# configuration errors -----------------------------------------------------------------

def test_missing_roles():
    with pytest.raises(LabelRoleMissing):
        GeometryConfig(GeometryKind.SLAB, {"endo": 20, "epi": 10})
    with pytest.raises(LabelRoleMissing):
        GeometryConfig(GeometryKind.LEFT_ATRIUM, {"endo": 10, "epi": 30, "mv": 40})


def test_missing_apex():
    with pytest.raises(MissingApex):
        GeometryConfig(GeometryKind.LV_BASED, {"endo": 20, "epi": 10, "base": 50})
    with pytest.raises(MissingApex):
        GeometryConfig(GeometryKind.LV_COMPLETE, {"endo": 20, "epi": 10, "mv": 50, "av": 60})
    with pytest.raises(MissingApex):
        atrium_config(appendage=True)


@pytest.mark.parametrize("kw", [{"tau_mv": 1.5}, {"tau_rpv": -0.1}])
def test_tau_range(kw):
    with pytest.raises(ParameterError):
        atrium_config(**kw)


def test_other_config_errors():
    with pytest.raises(ParameterError):
        GeometryConfig(GeometryKind.SPHERICAL_SLAB, {"endo": 20, "epi": 10})
    with pytest.raises(ParameterError):
        GeometryConfig(GeometryKind.LV_BASED, {"endo": 20, "epi": 10}, algorithm="RL")
    with pytest.raises(ParameterError):
        lv_config("XY")
    with pytest.raises(ParameterError):
        AngleSet(alpha_endo=float("nan"))
    assert GeometryConfig(GeometryKind.SLAB, SLAB_LABELS).role("base") == ()
