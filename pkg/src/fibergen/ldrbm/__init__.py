"""Laplace-Dirichlet rule-based fiber generation."""

from .drivers import generate_fibers
from .frames import Frame, angle_laws, build_frame, helical_angle, rotate_frame
from .normals import (
    BUNDLE_AB,
    BUNDLE_LPV,
    BUNDLE_MV,
    BUNDLE_RPV,
    atrial_normals,
    classify_bundles,
    normal_bt,
    normal_doste,
    normal_rl,
    transmural_potential,
)
from .types import AngleSet, FiberResult, GeometryConfig, GeometryKind, RunReport

__all__ = [
    "AngleSet",
    "BUNDLE_AB",
    "BUNDLE_LPV",
    "BUNDLE_MV",
    "BUNDLE_RPV",
    "FiberResult",
    "Frame",
    "GeometryConfig",
    "GeometryKind",
    "RunReport",
    "angle_laws",
    "atrial_normals",
    "build_frame",
    "classify_bundles",
    "generate_fibers",
    "helical_angle",
    "normal_bt",
    "normal_doste",
    "normal_rl",
    "rotate_frame",
    "transmural_potential",
]
