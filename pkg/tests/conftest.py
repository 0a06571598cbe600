import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fibergen.ldrbm import AngleSet, GeometryConfig, GeometryKind
from fibergen.mesh import (
    generate_ellipsoidal_lv,
    generate_idealized_atrium,
    generate_slab_mesh,
    generate_spherical_shell,
)

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


SLAB_ANGLES = AngleSet(alpha_endo=60, alpha_epi=-60, beta_endo=-45, beta_epi=45)
SLAB_LABELS = {"endo": 20, "epi": 10, "base_up": 50, "base_down": 60}


def slab_config(angles=SLAB_ANGLES):
    return GeometryConfig(GeometryKind.SLAB, SLAB_LABELS, angles)


def sphere_config(radial=True, scale=1.0):
    return GeometryConfig(GeometryKind.SPHERICAL_SLAB, {"endo": 20, "epi": 10},
                          north_pole=(0, 0, scale), south_pole=(0, 0, -scale), radial_fibers=radial)


def lv_config(algorithm="BT", scale=1.0):
    return GeometryConfig(GeometryKind.LV_BASED, {"endo": 20, "epi": 10, "base": 50},
                          AngleSet(60, -60, -20, 20), algorithm=algorithm,
                          normal_to_base=(0, 0, 1), apex=(0, 0, -0.06 * scale))


def lv_complete_config(scale=1.0):
    return GeometryConfig(GeometryKind.LV_COMPLETE, {"endo": 20, "epi": 10, "mv": 50, "av": 60},
                          AngleSet(60, -60, -20, 20, alpha_endo_ot=90, alpha_epi_ot=0,
                                   beta_endo_ot=0, beta_epi_ot=0),
                          apex=(0, 0, -0.06 * scale))


def atrium_config(**kw):
    return GeometryConfig(GeometryKind.LEFT_ATRIUM,
                          {"endo": 10, "epi": 30, "mv": 40, "lpv": 50, "rpv": 20}, **kw)


@pytest.fixture(scope="session")
def slab_hex():
    return generate_slab_mesh((1.0, 1.0, 1.0), (4, 4, 4), "hex")


@pytest.fixture(scope="session")
def slab_tet():
    return generate_slab_mesh((2.0, 1.0, 1.5), (4, 3, 3), "tet")


@pytest.fixture(scope="session")
def shell():
    return generate_spherical_shell(0.5, 1.0, n=6, n_layers=3)


@pytest.fixture(scope="session")
def lv_mesh():
    return generate_ellipsoidal_lv()


@pytest.fixture(scope="session")
def lv_complete_mesh():
    return generate_ellipsoidal_lv(complete=True)


@pytest.fixture(scope="session")
def atrium():
    return generate_idealized_atrium()


def driver_cases():
    """(name, mesh factory, config factory taking a length scale)."""
    return [
        ("slab-hex", lambda: generate_slab_mesh((1, 1, 1), (3, 3, 3), "hex", jitter=0.2),
         lambda s: slab_config()),
        ("slab-tet", lambda: generate_slab_mesh((1, 2, 1), (3, 3, 3), "tet"),
         lambda s: slab_config()),
        ("sphere", lambda: generate_spherical_shell(0.5, 1.0, 4, 2),
         lambda s: sphere_config(scale=s)),
        ("lv-bt", lambda: generate_ellipsoidal_lv(n=6), lambda s: lv_config("BT", s)),
        ("lv-rl", lambda: generate_ellipsoidal_lv(n=6), lambda s: lv_config("RL", s)),
        ("lv-complete", lambda: generate_ellipsoidal_lv(n=6, complete=True),
         lambda s: lv_complete_config(s)),
        ("atrium", lambda: generate_idealized_atrium(n=6), lambda s: atrium_config()),
    ]


def frame_errors(f, n, s):
    F = np.stack([f, n, s], axis=-1)
    orth = np.abs(np.einsum("vji,vjk->vik", F, F) - np.eye(3)).max()
    det = np.abs(np.linalg.det(F) - 1.0).max()
    return orth, det
