"""Nystrom discretization of the single-, double- and Laplace double-layer operators.

All operators carry the factor 2 (so the smooth-point jump is the identity)
and act on densities scaled by the mesh Jacobian, ``phi = jac * du/dnu``.
Self-interaction blocks use Kress's logarithmic kernel splitting; blocks
between distinct curves use the plain trapezoidal rule.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.spatial import cKDTree

from ._backend import bessel01
from .special import EULER_GAMMA, kress_log_weights

logger = logging.getLogger(__name__)

COND_LIMIT = 1e14


class IllConditionedError(RuntimeError):
    """Dense solve with a (numerically) singular matrix."""


class NearBoundaryWarning(UserWarning):
    pass


@dataclass
class LayerMatrices:
    S: np.ndarray
    K: np.ndarray
    D: np.ndarray  # diagonal of K0[1], stored as a vector
    offsets: np.ndarray  # block boundaries, len(meshes) + 1

    def block(self, i):
        return slice(self.offsets[i], self.offsets[i + 1])


def _pair_geometry(tx, sy, snu):
    d = tx[:, None, :] - sy[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    dn = np.einsum("ijk,jk->ij", d, snu)  # (x - y) . nu(y)
    return r, dn


def _self_block(mesh, k, rweights):
    n = mesh.n
    h = mesh.h
    r, dn = _pair_geometry(mesh.points, mesh.points, mesh.normals)
    diag = np.arange(n)
    r[diag, diag] = 1.0
    j0, j1, y0, y1 = bessel01(k * r)
    lg = np.log(4.0 * np.sin(0.5 * (mesh.t[:, None] - mesh.t[None, :])) ** 2 + np.eye(n))
    jac = mesh.jac[None, :]

    s_full = 0.5j * (j0 + 1j * y0)
    s1 = -j0 / (2.0 * np.pi)
    s2 = s_full - s1 * lg
    with np.errstate(divide="ignore"):
        s2_diag = 0.5j - EULER_GAMMA / np.pi - np.log(0.5 * k * mesh.jac) / np.pi
    s2_diag[mesh.is_corner] = 0.0
    s2[diag, diag] = s2_diag
    s1[diag, diag] = -1.0 / (2.0 * np.pi)

    l_full = 0.5j * k * (j1 + 1j * y1) * dn / r * jac
    l1 = -k / (2.0 * np.pi) * dn * j1 / r * jac
    l2 = l_full - l1 * lg
    with np.errstate(divide="ignore", invalid="ignore"):
        kdiag = np.where(mesh.jac > 0, mesh.curv / (2.0 * np.pi * mesh.jac), 0.0)
    l2[diag, diag] = kdiag
    l1[diag, diag] = 0.0

    k0 = dn / (np.pi * r * r) * jac
    k0[diag, diag] = kdiag

    idx = np.abs(diag[:, None] - diag[None, :])
    R = rweights[idx]
    S = R * s1 + h * s2
    K = R * l1 + h * l2
    return S, K, h * k0


def _cross_block(target, source, k):
    r, dn = _pair_geometry(target.points, source.points, source.normals)
    j0, j1, y0, y1 = bessel01(k * r)
    h = source.h
    jac = source.jac[None, :]
    S = h * 0.5j * (j0 + 1j * y0)
    K = h * 0.5j * k * (j1 + 1j * y1) * dn / r * jac
    K0 = h * dn / (np.pi * r * r) * jac
    return S, K, K0


def assemble(meshes, k):
    """Single layer S, double layer K and D = K0[1] on a union of closed curves."""
    sizes = [m.n for m in meshes]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = offsets[-1]
    S = np.empty((total, total), dtype=complex)
    K = np.empty((total, total), dtype=complex)
    D = np.zeros(total)
    for a, ma in enumerate(meshes):
        ra = slice(offsets[a], offsets[a + 1])
        for b, mb in enumerate(meshes):
            rb = slice(offsets[b], offsets[b + 1])
            if a == b:
                s, kk, k0 = _self_block(ma, k, kress_log_weights(ma.n))
            else:
                s, kk, k0 = _cross_block(ma, mb, k)
            S[ra, rb] = s
            K[ra, rb] = kk
            D[ra] += k0.sum(axis=1)
    return LayerMatrices(S, K, D, offsets)


def assemble_single_layer(meshes, k):
    return assemble(meshes, k).S


class NtDMatrix:
    """N = (K - D)^{-1} S, mapping scaled normal derivatives to traces."""

    def __init__(self, layers, check=True):
        A = layers.K - np.diag(layers.D)
        self.lu = sla.lu_factor(A, check_finite=False)
        if check:
            anorm = np.linalg.norm(A, 1)
            rcond, info = sla.lapack.zgecon(self.lu[0], anorm, norm="1")
            if rcond == 0 or 1.0 / rcond > COND_LIMIT:
                raise IllConditionedError(
                    "K - D is numerically singular; k is probably an irregular "
                    "frequency of the interior problem for this boundary")
        self.matrix = sla.lu_solve(self.lu, layers.S, check_finite=False)
        self.layers = layers

    def __matmul__(self, other):
        return self.matrix @ other

    @property
    def shape(self):
        return self.matrix.shape


def ntd_matrix(layers):
    return NtDMatrix(layers)


def _stack_meshes(meshes):
    pts = np.concatenate([m.points for m in meshes])
    nu = np.concatenate([m.normals for m in meshes])
    w = np.concatenate([m.weights for m in meshes])
    h = np.concatenate([np.full(m.n, m.h) for m in meshes])
    return pts, nu, w, h


def check_targets(targets, meshes, stacklevel=3):
    """Warn when targets sit within one local mesh spacing of the boundary."""
    pts, _, w, _ = _stack_meshes(meshes)
    dist, idx = cKDTree(pts).query(targets)
    spacing = np.maximum(w[idx], np.max(w) * 0.25)
    close = dist < spacing
    if np.any(close):
        warnings.warn(
            f"{int(close.sum())} target(s) within one mesh spacing of the boundary; "
            "trapezoidal field values there are inaccurate",
            NearBoundaryWarning, stacklevel=stacklevel)
    return close


def representation_matrices(targets, meshes, k, gradient=False, chunk=4096):
    """Matrices (SL, DL) such that u(x) = SL @ phi - DL @ trace.

    SL[i, j] = h Phi(x_i, y_j); DL[i, j] = h jac_j dPhi/dnu(y_j).
    With ``gradient=True`` both carry a leading axis of length 2 holding the
    x1 and x2 derivatives in the target.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    pts, nu, w, h = _stack_meshes(meshes)
    nt, nn = len(targets), len(pts)
    shape = (2, nt, nn) if gradient else (nt, nn)
    SL = np.empty(shape, dtype=complex)
    DL = np.empty(shape, dtype=complex)
    for i0 in range(0, nt, chunk):
        sl = slice(i0, min(i0 + chunk, nt))
        d = targets[sl, None, :] - pts[None, :, :]
        r = np.hypot(d[..., 0], d[..., 1])
        dn = np.einsum("ijk,jk->ij", d, nu)
        j0, j1, y0, y1 = bessel01(k * r)
        h0 = j0 + 1j * y0
        h1 = j1 + 1j * y1
        if not gradient:
            SL[sl] = 0.25j * h0 * h
            DL[sl] = 0.25j * k * h1 * dn / r * w
            continue
        gphi = -0.25j * k * h1 / r  # grad_x Phi = gphi * d
        radial = 0.25j * k * (k * h0 / r - 2.0 * h1 / (r * r)) * dn / r
        tang = 0.25j * k * h1 / r
        for c in range(2):
            SL[c, sl] = gphi * d[..., c] * h
            DL[c, sl] = (radial * d[..., c] + tang * nu[None, :, c]) * w
    return SL, DL


def potential_eval(targets, meshes, trace, dens, k, gradient=False, warn=True):
    """Green's representation sum over the boundary nodes.

    ``trace`` holds u and ``dens`` the scaled normal derivative at the
    stacked nodes of ``meshes`` (normals pointing out of the domain).
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if warn:
        check_targets(targets, meshes)
    SL, DL = representation_matrices(targets, meshes, k, gradient)
    return SL @ dens - DL @ trace
