"""Configuration and result containers for fiber generation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import LabelRoleMissing, MissingApex, ParameterError


class GeometryKind(enum.Enum):
    SLAB = "Slab"
    SPHERICAL_SLAB = "Spherical slab"
    LV_BASED = "Left ventricle"
    LV_COMPLETE = "Left ventricle complete"
    LEFT_ATRIUM = "Left atrium"


REQUIRED_ROLES = {
    GeometryKind.SLAB: ("endo", "epi", "base_up", "base_down"),
    GeometryKind.SPHERICAL_SLAB: ("endo", "epi"),
    GeometryKind.LV_BASED: ("endo", "epi"),
    GeometryKind.LV_COMPLETE: ("endo", "epi", "mv", "av"),
    GeometryKind.LEFT_ATRIUM: ("endo", "epi", "mv", "lpv", "rpv"),
}


@dataclass(frozen=True)
class AngleSet:
    """Rotation angles in degrees at the endocardium and epicardium.

    The ``*_ot`` endpoints are only used by the complete ventricle, where they
    apply at the aortic ring.
    """

    alpha_endo: float = 0.0
    alpha_epi: float = 0.0
    beta_endo: float = 0.0
    beta_epi: float = 0.0
    alpha_endo_ot: float | None = None
    alpha_epi_ot: float | None = None
    beta_endo_ot: float | None = None
    beta_epi_ot: float | None = None

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value is not None and not math.isfinite(value):
                raise ParameterError(f"angle {name} must be finite, got {value}")

    @property
    def has_ot(self):
        return self.alpha_endo_ot is not None


def _point(value, name):
    if value is None:
        return None
    p = np.asarray(value, dtype=float).reshape(-1)
    if p.shape != (3,) or not np.isfinite(p).all():
        raise ParameterError(f"{name} must be three finite coordinates, got {value!r}")
    return tuple(float(x) for x in p)


@dataclass(frozen=True)
class GeometryConfig:
    """Everything a geometry driver needs besides the mesh.

    ``labels`` maps a role (endo, epi, base_up, base_down, base, mv, av, lpv,
    rpv) to the surface labels playing that role. Points are in the units of
    the mesh the config is applied to.
    """

    kind: GeometryKind
    labels: dict
    angles: AngleSet = field(default_factory=AngleSet)
    algorithm: str = "BT"
    normal_to_base: tuple | None = None
    apex: tuple | None = None
    north_pole: tuple | None = None
    south_pole: tuple | None = None
    radial_fibers: bool = False
    appendage: bool = False
    tau_mv: float = 0.65
    tau_lpv: float = 0.85
    tau_rpv: float = 0.15

    def __post_init__(self):
        kind = GeometryKind(self.kind)
        object.__setattr__(self, "kind", kind)
        labels = {role: tuple(int(x) for x in np.atleast_1d(v)) for role, v in self.labels.items()}
        object.__setattr__(self, "labels", labels)
        for name in ("normal_to_base", "apex", "north_pole", "south_pole"):
            object.__setattr__(self, name, _point(getattr(self, name), name))
        algorithm = self.algorithm.upper()
        if algorithm not in ("RL", "BT"):
            raise ParameterError(f"algorithm must be RL or BT, got {self.algorithm!r}")
        object.__setattr__(self, "algorithm", algorithm)

        required = list(REQUIRED_ROLES[kind])
        if kind is GeometryKind.LV_BASED and algorithm == "BT":
            required.append("base")
        for role in required:
            if role not in labels:
                raise LabelRoleMissing(f"{kind.value} needs labels for role {role!r}")

        if kind is GeometryKind.SPHERICAL_SLAB and (self.north_pole is None or self.south_pole is None):
            raise ParameterError("the spherical slab needs a north and a south pole")
        if kind is GeometryKind.LV_BASED:
            if algorithm == "RL" and self.normal_to_base is None:
                raise ParameterError("the RL approach needs a normal to the base")
            if algorithm == "BT" and self.apex is None:
                raise MissingApex("the BT approach needs an apex point")
        if kind is GeometryKind.LV_COMPLETE and self.apex is None:
            raise MissingApex("the complete ventricle needs an apex point")
        if kind is GeometryKind.LEFT_ATRIUM and self.appendage and self.apex is None:
            raise MissingApex("Appendage = true requires the appendage apex point")
        for name in ("tau_mv", "tau_lpv", "tau_rpv"):
            tau = getattr(self, name)
            if not 0.0 <= tau <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {tau}")

    def role(self, name):
        return self.labels.get(name, ())


@dataclass
class RunReport:
    """Diagnostics collected while generating one fiber field."""

    degenerate_transmural: int = 0
    degenerate_normal: int = 0
    snapped_points: list = field(default_factory=list)  # (role, requested, vertex, coordinate)
    solves: list = field(default_factory=list)  # (name, iterations, residual)

    def lines(self):
        out = [f"degenerate transmural gradients: {self.degenerate_transmural}",
               f"degenerate normal directions: {self.degenerate_normal}"]
        for role, req, v, coord in self.snapped_points:
            out.append(f"{role}: requested {_fmt3(req)} -> vertex {v} at {_fmt3(coord)}")
        for name, it, res in self.solves:
            out.append(f"solve {name}: {it} CG iterations, residual {res:.3e}")
        return out


def _fmt3(p):
    return "(" + ", ".join(f"{x:.6g}" for x in p) + ")"


@dataclass(frozen=True, eq=False)
class FiberResult:
    """Fiber, sheet-normal and sheet fields plus the quantities used to build them.

    ``potentials`` holds the auxiliary harmonic fields by name (psi, psi_ab,
    psi_ot, w, psi_v, psi_r). ``alpha`` and ``beta`` are the per-vertex
    rotation angles in degrees, None where no rotation is applied.
    """

    f: np.ndarray
    n: np.ndarray
    s: np.ndarray
    phi: np.ndarray
    e_l: np.ndarray
    e_n: np.ndarray
    e_t: np.ndarray
    potentials: dict = field(default_factory=dict)
    bundle_id: np.ndarray | None = None
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    report: RunReport = field(default_factory=RunReport)
