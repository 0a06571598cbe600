"""Local frames, their rotation, and the transmural angle laws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

GRAD_TOL = 1e-12   # relative to the largest transmural gradient
NORMAL_TOL = 1e-10  # on the unit-normalised k


@dataclass(frozen=True, eq=False)
class Frame:
    e_l: np.ndarray
    e_n: np.ndarray
    e_t: np.ndarray
    degenerate_transmural: int = 0
    degenerate_normal: int = 0

    def matrix(self):
        """Per-vertex 3x3 matrices with columns (e_l, e_n, e_t)."""
        return np.stack([self.e_l, self.e_n, self.e_t], axis=-1)


def _unit(v):
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(norm > 0, v / norm, 0.0), norm[..., 0]


def vertex_neighbour_weights(mesh):
    """Sparse vertex-vertex matrix summing the volumes of the cells two vertices share."""
    k = mesh.cells.shape[1]
    rows = np.repeat(np.arange(mesh.n_cells), k)
    C = sp.csr_matrix((np.ones(rows.size), (rows, mesh.cells.ravel())),
                      shape=(mesh.n_cells, mesh.n_vertices))
    return (C.T @ sp.diags(mesh.cell_volumes()) @ C).tocsr()


def _transmural(grad_phi, mesh):
    e_t, norm = _unit(np.asarray(grad_phi, dtype=float))
    scale = norm.max() if norm.size else 0.0
    bad = norm <= GRAD_TOL * scale if scale > 0 else np.ones(norm.shape, dtype=bool)
    if bad.any() and mesh is not None and (~bad).any():
        W = vertex_neighbour_weights(mesh)[bad]
        avg, avg_norm = _unit(W @ np.where(bad[:, None], 0.0, e_t))
        idx = np.flatnonzero(bad)
        ok = avg_norm > GRAD_TOL
        e_t[idx[ok]] = avg[ok]
        e_t[idx[~ok]] = (0.0, 0.0, 1.0)
    elif bad.any():
        e_t[bad] = (0.0, 0.0, 1.0)
    return e_t, int(bad.sum())


def _fallback_normal(e_t):
    """A unit vector orthogonal to each e_t, from the axis e_t is least aligned with.

    Components within 1e-8 of each other count as tied and the lower axis
    wins, so rounding noise in e_t cannot flip the choice.
    """
    axis = np.argmin(np.round(np.abs(e_t), 8), axis=1)
    a = np.zeros_like(e_t)
    a[np.arange(len(e_t)), axis] = 1.0
    a -= (a * e_t).sum(axis=1)[:, None] * e_t
    return _unit(a)[0]


def build_frame(grad_phi, k, mesh=None):
    """Orthonormal frame (e_l, e_n, e_t) from the transmural gradient and a normal field.

    e_t is the unit transmural gradient, e_n the unit part of k orthogonal
    to e_t, e_l = e_n x e_t. Vanishing gradients take the volume-weighted
    mean of neighbouring e_t (needs ``mesh``), then +z; k parallel to e_t is
    replaced by a deterministic perpendicular axis. Both are counted.
    """
    grad_phi = np.atleast_2d(np.asarray(grad_phi, dtype=float))
    k = np.broadcast_to(np.asarray(k, dtype=float), grad_phi.shape)
    e_t, n_bad_t = _transmural(grad_phi, mesh)

    k_unit, _ = _unit(k)
    k_perp = k_unit - (k_unit * e_t).sum(axis=1)[:, None] * e_t
    e_n, perp_norm = _unit(k_perp)
    bad_n = perp_norm < NORMAL_TOL
    if bad_n.any():
        e_n[bad_n] = _fallback_normal(e_t[bad_n])
    # one more projection removes the rounding left by the first
    e_n -= (e_n * e_t).sum(axis=1)[:, None] * e_t
    e_n = _unit(e_n)[0]
    e_l = np.cross(e_n, e_t)
    return Frame(e_l, e_n, e_t, n_bad_t, int(bad_n.sum()))


def rotate_frame(e_l, e_n, e_t, alpha, beta):
    """Rotate the frame by the helical angle ``alpha`` and sheetlet angle ``beta`` (degrees).

    First (e_l, e_n) turn about e_t by alpha, then (e_t, e_n) turn about the
    rotated e_l by beta, both counter-clockwise. Returns (f, n, s).
    """
    a = np.radians(np.asarray(alpha, dtype=float))[..., None]
    b = np.radians(np.asarray(beta, dtype=float))[..., None]
    ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
    # for a right-handed (e_l, e_n, e_t): e_t x e_l = e_n and e_t x e_n = -e_l
    f = ca * e_l + sa * e_n
    n1 = ca * e_n - sa * e_l
    # f x e_t = -n1 and f x n1 = e_t
    s = cb * e_t - sb * n1
    n = cb * n1 + sb * e_t
    return f, n, s


def angle_laws(phi, angles, w_ot=None):
    """Helical and sheetlet angles (degrees) at transmural position ``phi``.

    With ``w_ot`` the four endpoints are first blended towards their outflow
    tract values, reaching them where ``w_ot`` is 0.
    """
    phi = np.clip(np.asarray(phi, dtype=float), 0.0, 1.0)
    a_endo, a_epi, b_endo, b_epi = angles.alpha_endo, angles.alpha_epi, angles.beta_endo, angles.beta_epi
    if w_ot is not None and angles.has_ot:
        w = np.clip(np.asarray(w_ot, dtype=float), 0.0, 1.0)
        a_endo = w * a_endo + (1 - w) * angles.alpha_endo_ot
        a_epi = w * a_epi + (1 - w) * angles.alpha_epi_ot
        b_endo = w * b_endo + (1 - w) * angles.beta_endo_ot
        b_epi = w * b_epi + (1 - w) * angles.beta_epi_ot
    alpha = a_endo * (1 - phi) + a_epi * phi
    beta = b_endo * (1 - phi) + b_epi * phi
    return alpha, beta


def helical_angle(f, e_l, e_n):
    """Signed angle (degrees) from e_l to the projection of f on the (e_l, e_n) plane."""
    return np.degrees(np.arctan2((f * e_n).sum(axis=-1), (f * e_l).sum(axis=-1)))
