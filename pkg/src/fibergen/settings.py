"""The fiber-generation parameter tree and its conversion to typed configs.

Standard verbosity covers the mesh file, element type, refinements, scaling
and output switches. Geometry selection, per-geometry subsections and linear
solver settings are full-verbosity entries; they are still accepted from any
file, whatever verbosity it was generated with.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MissingApex, ParameterError, UnsupportedDegree
from .fem import SolverOptions
from .ldrbm.types import AngleSet, GeometryConfig, GeometryKind
from .mesh.core import ElementKind
from .output import OutputSpec
from .params import ParamEntry, ParamTree, Pattern

ROOT = "Fiber generation"
MESH = f"{ROOT}/Mesh and space discretization"
OUTPUT = f"{ROOT}/Output"
SOLVER = f"{ROOT}/Linear solver"
GEOMETRY_TYPES = ("Slab", "Left ventricle", "Left ventricle complete", "Left atrium")

_TAGS = Pattern.list(Pattern.integer(), separator=",")
_POINT = Pattern.list(Pattern.double(), 3, 3, separator=" ")
_OPTIONAL_POINT = Pattern.list(Pattern.double(), 0, 3, separator=" ")
_ANGLE = Pattern.double()
_UNIT = Pattern.double(0.0, 1.0)


def _e(name, default, pattern, doc, verbosity="full"):
    return ParamEntry(name, default, pattern, doc, verbosity)


def _angles(tree, path, ot=False, defaults=(-60, 60, 20, -20)):
    names = ("alpha epi", "alpha endo", "beta epi", "beta endo")
    for name, d in zip(names, defaults):
        tree.declare(path, _e(name, str(d), _ANGLE, f"Rotation angle {name} [deg]."))
    if ot:
        for name, d in zip(names, (0, 90, 0, 0)):
            tree.declare(path, _e(f"{name} OT", str(d), _ANGLE,
                                  f"Rotation angle {name} at the aortic ring [deg]."))


def declare_parameters(tree=None):
    """Declare every fiber-generation parameter; returns the tree."""
    tree = ParamTree() if tree is None else tree
    # the first six declarations fix the pattern indices 0..5
    tree.declare(f"{MESH}/File", _e("Filename", "", Pattern.filename(),
                                    "Mesh file (Gmsh msh, ASCII 4.1 or 2.2).", "minimal"))
    tree.declare(f"{MESH}/File", _e("Scaling factor", "1e-3", Pattern.double(0.0),
                                    "Factor applied to the mesh coordinates, e.g. 1e-3 for mm to m.",
                                    "standard"))
    tree.declare(MESH, _e("Element type", "Hex", Pattern.selection("Hex", "Tet"),
                          "Cell shape of the input mesh: Hex or Tet.", "minimal"))
    tree.declare(MESH, _e("Number of refinements", "0", Pattern.integer(0),
                          "Uniform refinement steps applied after loading (Hex only).", "standard"))
    tree.declare(OUTPUT, _e("Enable output", "true", Pattern.bool(),
                            "Write the fiber fields to disk.", "standard"))
    tree.declare(OUTPUT, _e("Filename", "fibers", Pattern.filename(output=True),
                            "Output basename, written as <basename>.vtu.", "standard"))

    tree.declare(MESH, _e("FE space degree", "1", Pattern.integer(1),
                          "Polynomial degree of the finite element space (only 1 is available)."))
    tree.declare(MESH, _e("Geometry type", "Slab", Pattern.selection(*GEOMETRY_TYPES),
                          "Geometry driver; its parameters are read from the subsection of the same name."))

    slab = f"{ROOT}/Slab"
    tree.declare(slab, _e("Sphere slab", "false", Pattern.bool(),
                          "Treat the slab as a spherical shell with poles."))
    tree.declare(slab, _e("Sphere with radial fibers", "false", Pattern.bool(),
                          "On the spherical slab, exchange fiber and sheet directions."))
    tree.declare(slab, _e("North pole", "0 0 0.025", _POINT, "Epicardial north pole (x y z)."))
    tree.declare(slab, _e("South pole", "0 0 -0.025", _POINT, "Epicardial south pole (x y z)."))
    for name, d in (("Tags base up", "50"), ("Tags base down", "60"),
                    ("Tags epi", "10"), ("Tags endo", "20")):
        tree.declare(slab, _e(name, d, _TAGS, f"Surface labels: {name[5:]}."))
    _angles(tree, slab, defaults=(-60, 60, 45, -45))

    lv = f"{ROOT}/Left ventricle"
    for name, d in (("Tags base", "50"), ("Tags epi", "10"), ("Tags endo", "20")):
        tree.declare(lv, _e(name, d, _TAGS, f"Surface labels: {name[5:]}."))
    tree.declare(lv, _e("Algorithm type", "BT", Pattern.selection("RL", "BT"),
                        "Normal direction from a fixed base normal (RL) or a base-apex potential (BT)."))
    _angles(tree, lv)
    tree.declare(f"{lv}/RL", _e("Normal to base", "0 0 1", _POINT, "Outward normal of the basal plane."))
    tree.declare(f"{lv}/BT", _e("Apex", "0 0 0.0601846", _POINT,
                                "Epicardial apex (x y z), in scaled mesh units."))

    lvc = f"{ROOT}/Left ventricle complete"
    for name, d in (("Tags MV", "50"), ("Tags AV", "60"), ("Tags epi", "10"), ("Tags endo", "20")):
        tree.declare(lvc, _e(name, d, _TAGS, f"Surface labels: {name[5:]}."))
    tree.declare(lvc, _e("Apex", "0.0692 0.0710 0.3522", _POINT,
                         "Epicardial apex (x y z), in scaled mesh units."))
    _angles(tree, lvc, ot=True)

    la = f"{ROOT}/Left atrium"
    tree.declare(la, _e("Appendage", "false", Pattern.bool(),
                        "Use the appendage apex as the zero set of the apicobasal potential."))
    tree.declare(la, _e("Apex", "", _OPTIONAL_POINT,
                        "Appendage apex (x y z), required when Appendage = true."))
    for name, d in (("Tags epi", "30"), ("Tags endo", "10"), ("Tags RPV", "20"),
                    ("Tags LPV", "50"), ("Tags MV", "40")):
        tree.declare(la, _e(name, d, _TAGS, f"Surface labels: {name[5:]}."))
    for name, d in (("Tau bundle MV", "0.65"), ("Tau bundle LPV", "0.85"), ("Tau bundle RPV", "0.15")):
        tree.declare(la, _e(name, d, _UNIT, f"Bundle threshold {name[11:]}."))

    tree.declare(SOLVER, _e("Relative tolerance", "1e-12", Pattern.double(0.0),
                            "CG stops once the residual norm is below this times the rhs norm."))
    tree.declare(SOLVER, _e("Absolute tolerance", "1e-14", Pattern.double(0.0),
                            "Lower bound of the CG stopping threshold."))
    tree.declare(SOLVER, _e("Maximum iterations", "0", Pattern.integer(0),
                            "CG iteration cap; 0 means ten times the number of unknowns."))
    tree.declare(SOLVER, _e("Preconditioner", "Jacobi", Pattern.selection("Jacobi", "None"),
                            "CG preconditioner."))
    return tree


@dataclass(frozen=True)
class MeshSettings:
    filename: str
    element_kind: ElementKind
    n_refinements: int
    scaling_factor: float


@dataclass(frozen=True)
class RunConfig:
    mesh: MeshSettings
    geometry: GeometryConfig
    output: OutputSpec
    solver: SolverOptions


def _angle_set(tree, path, ot=False):
    g = lambda name: tree.typed(f"{path}/{name}")  # noqa: E731
    kw = {}
    if ot:
        kw = dict(alpha_endo_ot=g("alpha endo OT"), alpha_epi_ot=g("alpha epi OT"),
                  beta_endo_ot=g("beta endo OT"), beta_epi_ot=g("beta epi OT"))
    return AngleSet(g("alpha endo"), g("alpha epi"), g("beta endo"), g("beta epi"), **kw)


def geometry_from_params(tree):
    gtype = tree.typed(f"{MESH}/Geometry type")
    path = f"{ROOT}/{gtype}"
    t = lambda name: tree.typed(f"{path}/{name}")  # noqa: E731
    if gtype == "Slab":
        if t("Sphere slab"):
            return GeometryConfig(GeometryKind.SPHERICAL_SLAB,
                                  {"endo": t("Tags endo"), "epi": t("Tags epi")},
                                  _angle_set(tree, path),
                                  north_pole=t("North pole"), south_pole=t("South pole"),
                                  radial_fibers=t("Sphere with radial fibers"))
        return GeometryConfig(GeometryKind.SLAB,
                              {"endo": t("Tags endo"), "epi": t("Tags epi"),
                               "base_up": t("Tags base up"), "base_down": t("Tags base down")},
                              _angle_set(tree, path))
    if gtype == "Left ventricle":
        return GeometryConfig(GeometryKind.LV_BASED,
                              {"endo": t("Tags endo"), "epi": t("Tags epi"), "base": t("Tags base")},
                              _angle_set(tree, path), algorithm=t("Algorithm type"),
                              normal_to_base=t("RL/Normal to base"), apex=t("BT/Apex"))
    if gtype == "Left ventricle complete":
        return GeometryConfig(GeometryKind.LV_COMPLETE,
                              {"endo": t("Tags endo"), "epi": t("Tags epi"),
                               "mv": t("Tags MV"), "av": t("Tags AV")},
                              _angle_set(tree, path, ot=True), apex=t("Apex"))
    apex = t("Apex")
    if len(apex) not in (0, 3):
        raise ParameterError("expected three coordinates or nothing", f"{path}/Apex")
    if t("Appendage") and not apex:
        raise MissingApex("Appendage = true requires the appendage apex point", f"{path}/Apex")
    return GeometryConfig(GeometryKind.LEFT_ATRIUM,
                          {"endo": t("Tags endo"), "epi": t("Tags epi"), "mv": t("Tags MV"),
                           "lpv": t("Tags LPV"), "rpv": t("Tags RPV")},
                          appendage=t("Appendage"), apex=apex or None,
                          tau_mv=t("Tau bundle MV"), tau_lpv=t("Tau bundle LPV"),
                          tau_rpv=t("Tau bundle RPV"))


def config_from_params(tree):
    """Typed run configuration from a parsed tree."""
    degree = tree.typed(f"{MESH}/FE space degree")
    if degree != 1:
        raise UnsupportedDegree(f"only degree 1 is implemented, got {degree}",
                                f"{MESH}/FE space degree")
    mesh = MeshSettings(
        filename=tree.typed(f"{MESH}/File/Filename"),
        element_kind=ElementKind.parse(tree.typed(f"{MESH}/Element type")),
        n_refinements=tree.typed(f"{MESH}/Number of refinements"),
        scaling_factor=tree.typed(f"{MESH}/File/Scaling factor"),
    )
    if mesh.scaling_factor <= 0:
        raise ParameterError("must be positive", f"{MESH}/File/Scaling factor")
    rtol, atol = tree.typed(f"{SOLVER}/Relative tolerance"), tree.typed(f"{SOLVER}/Absolute tolerance")
    for name, v in (("Relative tolerance", rtol), ("Absolute tolerance", atol)):
        if v <= 0:
            raise ParameterError("must be positive", f"{SOLVER}/{name}")
    solver = SolverOptions(rtol=rtol, atol=atol,
                           max_iterations=tree.typed(f"{SOLVER}/Maximum iterations") or None,
                           preconditioner=tree.typed(f"{SOLVER}/Preconditioner"))
    enabled, filename = tree.typed(f"{OUTPUT}/Enable output"), tree.typed(f"{OUTPUT}/Filename")
    if enabled and not filename.strip():
        raise ParameterError("must be non-empty when output is enabled", f"{OUTPUT}/Filename")
    output = OutputSpec(enabled=enabled, filename=filename)
    return RunConfig(mesh, geometry_from_params(tree), output, solver)
