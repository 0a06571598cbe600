"""Transmural potential and the normal-direction fields k."""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial import cKDTree

from ..errors import EmptyBoundarySet, OverlappingRings, ZeroVector
from ..fem import LaplaceProblemSpec, LaplaceSolver, nodal_gradient
from ..mesh.core import boundary_vertices_with_labels, nearest_vertex
from .types import RunReport

log = logging.getLogger(__name__)

BUNDLE_AB, BUNDLE_MV, BUNDLE_LPV, BUNDLE_RPV = 0, 1, 2, 3


class _Context:
    """Shares one stiffness assembly and one report across the solves of a run."""

    def __init__(self, mesh, solver=None, report=None):
        self.mesh = mesh
        self.solver = solver if solver is not None else LaplaceSolver(mesh)
        self.report = report if report is not None else RunReport()

    def vertices(self, labels, role):
        v = boundary_vertices_with_labels(self.mesh, labels)
        if v.size == 0:
            raise EmptyBoundarySet(role)
        return v

    def point(self, point, role):
        v = nearest_vertex(self.mesh, point)
        coord = tuple(float(x) for x in self.mesh.vertices[v])
        requested = tuple(float(x) for x in point)
        self.report.snapped_points.append((role, requested, v, coord))
        log.info("%s %s snapped to vertex %d at %s", role, requested, v, coord)
        return np.array([v])

    def solve(self, name, constraints):
        u = self.solver.solve(LaplaceProblemSpec(tuple(constraints)))
        info = self.solver.last_info
        self.report.solves.append((name, info.iterations, info.residual))
        return u


def _context(mesh, ctx):
    return ctx if ctx is not None else _Context(mesh)


def transmural_potential(mesh, endo_labels, epi_labels, ctx=None):
    """Harmonic phi with phi = 0 on the endocardium and 1 on the epicardium."""
    ctx = _context(mesh, ctx)
    endo = ctx.vertices(endo_labels, "endo")
    epi = ctx.vertices(epi_labels, "epi")
    return ctx.solve("phi", [(endo, 0.0), (epi, 1.0)])


def normal_rl(mesh, n_base):
    """Constant k equal to the (unnormalised) outward normal of the basal plane."""
    n_base = np.asarray(n_base, dtype=float).reshape(3)
    if not np.linalg.norm(n_base) > 0:
        raise ZeroVector("the normal to the base must be non-zero")
    return np.tile(n_base, (mesh.n_vertices, 1))


def normal_bt(mesh, base_labels, apex=None, apex_labels=None, ctx=None):
    """k = grad psi with psi = 1 on the base and 0 at the apex.

    The apex is either a point, snapped to its nearest vertex, or a set of
    surface labels (the slab uses its whole bottom surface).
    """
    ctx = _context(mesh, ctx)
    base = ctx.vertices(base_labels, "base")
    if apex_labels is not None:
        bottom = ctx.vertices(apex_labels, "apex")
    elif apex is not None:
        bottom = ctx.point(apex, "apex")
    else:
        raise ValueError("normal_bt needs an apex point or apex labels")
    psi = ctx.solve("psi", [(base, 1.0), (bottom, 0.0)])
    return nodal_gradient(mesh, psi), psi


def normal_doste(mesh, mv_labels, av_labels, apex, ctx=None):
    """Blend of the apex-to-mitral and apex-to-aortic gradients.

    Returns (k, w, psi_ab, psi_ot) with k = w grad psi_ab + (1 - w) grad psi_ot,
    where w is 1 on the mitral ring and at the apex and 0 on the aortic ring.
    """
    ctx = _context(mesh, ctx)
    mv = ctx.vertices(mv_labels, "mv")
    av = ctx.vertices(av_labels, "av")
    shared = np.intersect1d(mv, av)
    if shared.size:
        raise OverlappingRings(
            f"mitral and aortic rings share {shared.size} vertices (e.g. vertex {int(shared[0])})")
    apex_v = ctx.point(apex, "apex")
    psi_ab = ctx.solve("psi_ab", [(mv, 1.0), (apex_v, 0.0)])
    psi_ot = ctx.solve("psi_ot", [(av, 1.0), (apex_v, 0.0)])
    w = np.clip(ctx.solve("w", [(np.union1d(mv, apex_v), 1.0), (av, 0.0)]), 0.0, 1.0)
    k = w[:, None] * nodal_gradient(mesh, psi_ab) + (1 - w)[:, None] * nodal_gradient(mesh, psi_ot)
    return k, w, psi_ab, psi_ot


def farthest_vertex(mesh, targets):
    """Vertex whose distance to the nearest of ``targets`` is largest (smallest index on ties)."""
    dist, _ = cKDTree(mesh.vertices[targets]).query(mesh.vertices)
    return int(np.argmax(dist))


def classify_bundles(psi_r, psi_v, tau_mv, tau_lpv, tau_rpv):
    """Bundle per vertex: MV if psi_r >= tau_mv, else LPV/RPV on psi_v, else apicobasal.

    A threshold at the far end of [0, 1] (tau_mv or tau_lpv = 1, tau_rpv = 0)
    switches its bundle off, boundary vertices included.
    """
    bundle = np.full(psi_r.shape, BUNDLE_AB, dtype=np.int64)
    mv = (psi_r >= tau_mv) & (tau_mv < 1.0)
    lpv = ~mv & (psi_v >= tau_lpv) & (tau_lpv < 1.0)
    rpv = ~mv & ~lpv & (psi_v <= tau_rpv) & (tau_rpv > 0.0)
    bundle[mv] = BUNDLE_MV
    bundle[lpv] = BUNDLE_LPV
    bundle[rpv] = BUNDLE_RPV
    return bundle


def atrial_normals(mesh, config, ctx=None):
    """Per-bundle normal direction for the left atrium.

    Returns (k, bundle_id, psi_ab, psi_v, psi_r). Each bundle takes the
    gradient of its own potential, flipped if needed so that on average it
    agrees with grad psi_ab; this keeps e_n from reversing between bundles.
    """
    ctx = _context(mesh, ctx)
    mv = ctx.vertices(config.role("mv"), "mv")
    lpv = ctx.vertices(config.role("lpv"), "lpv")
    rpv = ctx.vertices(config.role("rpv"), "rpv")
    veins = np.union1d(lpv, rpv)

    psi_r = ctx.solve("psi_r", [(mv, 1.0), (veins, 0.0)])
    psi_v = ctx.solve("psi_v", [(lpv, 1.0), (rpv, 0.0)])
    if config.appendage:
        tip = ctx.point(config.apex, "appendage apex")
    else:
        tip = np.array([farthest_vertex(mesh, mv)])
        coord = tuple(float(x) for x in mesh.vertices[tip[0]])
        ctx.report.snapped_points.append(("farthest from MV", coord, int(tip[0]), coord))
        log.info("apicobasal zero set at vertex %d (farthest from the mitral ring)", tip[0])
    psi_ab = ctx.solve("psi_ab", [(np.union1d(mv, veins), 1.0), (tip, 0.0)])

    bundle = classify_bundles(psi_r, psi_v, config.tau_mv, config.tau_lpv, config.tau_rpv)
    g_ab = nodal_gradient(mesh, psi_ab)
    g_r = nodal_gradient(mesh, psi_r)
    g_v = nodal_gradient(mesh, psi_v)
    k = g_ab.copy()
    for b, g in ((BUNDLE_MV, g_r), (BUNDLE_LPV, g_v), (BUNDLE_RPV, g_v)):
        sel = bundle == b
        if sel.any():
            sign = -1.0 if (g[sel] * g_ab[sel]).sum() < 0 else 1.0
            k[sel] = sign * g[sel]
    return k, bundle, psi_ab, psi_v, psi_r
