"""Geometry drivers: from a labelled mesh and a config to a fiber field."""

from __future__ import annotations

import logging

import numpy as np

from ..fem import LaplaceSolver, nodal_gradient
from .frames import angle_laws, build_frame, rotate_frame
from .normals import (
    _Context,
    atrial_normals,
    normal_bt,
    normal_doste,
    normal_rl,
    transmural_potential,
)
from .types import FiberResult, GeometryKind, RunReport

log = logging.getLogger(__name__)


def generate_fibers(mesh, config, solver_options=None):
    """Run the rule-based method selected by ``config.kind`` on ``mesh``."""
    report = RunReport()
    ctx = _Context(mesh, LaplaceSolver(mesh, solver_options), report)
    phi = transmural_potential(mesh, config.role("endo"), config.role("epi"), ctx)
    grad_phi = nodal_gradient(mesh, phi)
    potentials = {}
    bundle = None
    w_ot = None
    kind = config.kind

    if kind is GeometryKind.SLAB:
        k, potentials["psi"] = normal_bt(mesh, config.role("base_up"),
                                         apex_labels=config.role("base_down"), ctx=ctx)
    elif kind is GeometryKind.SPHERICAL_SLAB:
        k, potentials["psi"] = _sphere_normal(mesh, config, ctx)
    elif kind is GeometryKind.LV_BASED:
        if config.algorithm == "RL":
            k = normal_rl(mesh, config.normal_to_base)
        else:
            k, potentials["psi"] = normal_bt(mesh, config.role("base"), apex=config.apex, ctx=ctx)
    elif kind is GeometryKind.LV_COMPLETE:
        k, w_ot, potentials["psi_ab"], potentials["psi_ot"] = normal_doste(
            mesh, config.role("mv"), config.role("av"), config.apex, ctx)
        potentials["w"] = w_ot
    elif kind is GeometryKind.LEFT_ATRIUM:
        k, bundle, potentials["psi_ab"], potentials["psi_v"], potentials["psi_r"] = \
            atrial_normals(mesh, config, ctx)
    else:  # pragma: no cover - GeometryKind is closed
        raise ValueError(f"unknown geometry {kind}")

    frame = build_frame(grad_phi, k, mesh)
    report.degenerate_transmural = frame.degenerate_transmural
    report.degenerate_normal = frame.degenerate_normal
    if frame.degenerate_transmural or frame.degenerate_normal:
        log.warning("frame fallbacks: %d transmural, %d normal",
                    frame.degenerate_transmural, frame.degenerate_normal)

    if kind is GeometryKind.LEFT_ATRIUM:
        # atrial fibers follow the unrotated frame
        f, n, s = frame.e_l, frame.e_n, frame.e_t
        alpha = beta = None
    else:
        alpha, beta = angle_laws(phi, config.angles, w_ot)
        f, n, s = rotate_frame(frame.e_l, frame.e_n, frame.e_t, alpha, beta)
        if kind is GeometryKind.SPHERICAL_SLAB and config.radial_fibers:
            # exchanging f and s; n flips to keep the triad right-handed
            f, n, s = s, -n, f

    return FiberResult(f=f, n=n, s=s, phi=phi, e_l=frame.e_l, e_n=frame.e_n, e_t=frame.e_t,
                       potentials=potentials, bundle_id=bundle, alpha=alpha, beta=beta,
                       report=report)


def _sphere_normal(mesh, config, ctx):
    north = ctx.point(config.north_pole, "north pole")
    south = ctx.point(config.south_pole, "south pole")
    psi = ctx.solve("psi", [(north, 1.0), (south, 0.0)])
    return nodal_gradient(mesh, psi), psi
