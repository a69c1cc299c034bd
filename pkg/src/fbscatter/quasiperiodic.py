"""Quasi-periodic cell problem: Rayleigh DtN maps and the per-alpha linear system.

The unknown of every cell solve is the scaled normal derivative of the
scattered field on [obstacle nodes; rectangle nodes]. Row blocks enforce,
in order: trace quasi-periodicity across the walls, derivative
quasi-periodicity, the bottom and top Rayleigh conditions, and the
Dirichlet condition on the obstacle.

Quasi-periodicity convention: u(x1 + 2 pi, x2) = exp(2 pi i alpha) u(x1, x2).
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import geometry
from ._backend import bessel01
from .layers import NtDMatrix, assemble
from .special import ParameterError

logger = logging.getLogger(__name__)


class TruncationWarning(UserWarning):
    pass


def reduce_alpha(a):
    """Map a quasimomentum to (-1/2, 1/2]."""
    r = a - np.floor(a + 0.5)
    return 0.5 if r == -0.5 else float(r)


def beta(k, alpha, l):
    """sqrt(k^2 - (alpha + l)^2) with arg in [0, pi)."""
    al = np.asarray(alpha + np.asarray(l), dtype=float)
    return np.sqrt((k * k - al * al) + 0j)


def dtn_matrix(alpha, points, jac, h, k, J):
    """Discrete scaled DtN map on a horizontal segment.

    ``phi_j = sum_k B[j, k] u_k`` with ``phi = jac * du/dnu`` (nu pointing away
    from the cell), for an outgoing alpha-quasi-periodic u.
    """
    if J < k + 2:
        warnings.warn(f"Rayleigh truncation J={J} is below k + 2", TruncationWarning,
                      stacklevel=2)
    ls = np.arange(-J, J + 1)
    E = np.exp(1j * np.outer(points[:, 0], alpha + ls))
    b = beta(k, alpha, ls)
    return (0.5j / np.pi) * (jac[:, None] * (E * b)) @ (E.conj().T * (h * jac)[None, :])


def point_source_data(points, normals, jac, xs, k, direction=None):
    """Traces and scaled normal derivatives of Phi(.; xs) on boundary nodes.

    ``direction=None`` gives the monopole; a vector (or one vector per source)
    gives the source-directional derivative d/dxs . direction.
    Returns arrays of shape (n_nodes, n_sources).
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    d = points[:, None, :] - xs[None, :, :]
    r = np.hypot(d[..., 0], d[..., 1])
    if np.any(r == 0):
        raise ParameterError("source located on a boundary node")
    j0, j1, y0, y1 = bessel01(k * r)
    h0 = j0 + 1j * y0
    h1 = j1 + 1j * y1
    f1 = -0.25j * k * h1  # dPhi/dr
    dnu = np.einsum("ijk,ik->ij", d, normals)
    if direction is None:
        return 0.25j * h0, jac[:, None] * f1 * dnu / r
    m = np.broadcast_to(np.asarray(direction, dtype=float), xs.shape)
    dm = np.einsum("ijk,jk->ij", d, m)
    # d/dy = -d/dx for Phi(x - y)
    trace = -f1 * dm / r
    f2 = -0.25j * k * k * (h0 - h1 / (k * r))  # d2Phi/dr2
    num = np.einsum("ik,jk->ij", normals, m)
    hess = (f2 - f1 / r) * dnu * dm / (r * r) + f1 / r * num
    return trace, -jac[:, None] * hess


@dataclass
class RayleighExpansion:
    alpha: float
    k: float
    H: float
    ls: np.ndarray
    top: np.ndarray  # (2J+1, ...) coefficients
    bottom: np.ndarray

    def evaluate(self, x, gradient=False, margin=0.0):
        """Series value (or gradient, shape (2, ...)) at points with |x2| >= H - margin.

        A positive margin continues the series into the strip; it must stay
        above every source and obstacle.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if np.any(np.abs(x[:, 1]) < (self.H - margin) * (1 - 1e-12)):
            raise ParameterError("Rayleigh series is valid only for |x2| >= H")
        al = self.alpha + self.ls
        b = beta(self.k, self.alpha, self.ls)
        up = x[:, 1] > 0
        coef = np.where(up[:, None], 1.0, 0.0)
        phase = np.exp(1j * np.outer(x[:, 0], al) + 1j * np.outer(np.abs(x[:, 1]) - self.H, b))
        # rows: targets; pick the coefficient set by half-plane
        val_top = phase @ self.top.reshape(len(self.ls), -1)
        val_bot = phase @ self.bottom.reshape(len(self.ls), -1)
        sel = coef.reshape(-1, 1)
        if not gradient:
            out = sel * val_top + (1 - sel) * val_bot
            return out.reshape((len(x),) + self.top.shape[1:])
        sgn = np.where(up, 1.0, -1.0)[:, None]
        g1 = phase * (1j * al)[None, :]
        g2 = phase * (1j * b)[None, :] * sgn
        out = []
        for g in (g1, g2):
            t = g @ self.top.reshape(len(self.ls), -1)
            bo = g @ self.bottom.reshape(len(self.ls), -1)
            out.append((sel * t + (1 - sel) * bo).reshape((len(x),) + self.top.shape[1:]))
        return np.stack(out)

    def energy_balance(self, theta):
        """Reflected plus transmitted flux over incident flux for scattered-field
        coefficients of a downward plane wave; 1 for a lossless array."""
        b = beta(self.k, self.alpha, self.ls)
        prop = np.abs(b.imag) < 1e-14
        b0 = self.k * np.sin(theta)
        l0 = np.argmin(np.abs(self.alpha + self.ls - self.k * np.cos(theta)))
        trans = self.bottom.copy()
        trans[l0] += np.exp(1j * b0 * self.H)
        flux = np.sum((np.abs(self.top[prop]) ** 2 + np.abs(trans[prop]) ** 2) * b[prop].real)
        return float(flux / b0)


class PeriodicCell:
    """Truncated unit cell: obstacle mesh + rectangle, with the NtD matrix."""

    def __init__(self, obstacle, k, H=np.pi, M=150, N=600, p=6, J=50):
        self.k = float(k)
        self.H = float(H)
        self.J = int(J)
        self.obstacle_curve = obstacle
        self.obstacle = geometry.build_mesh(obstacle, M, p, normal="inward")
        self.rect = geometry.cell_rectangle(H, N, p)
        self.meshes = [self.obstacle, self.rect.mesh]
        self.layers = assemble(self.meshes, self.k)
        self.ntd = NtDMatrix(self.layers)
        off = M
        self.idx_obstacle = np.arange(M)
        self.idx_left = self.rect.left + off
        self.idx_right = self.rect.right + off
        self.idx_bottom = self.rect.bottom + off
        self.idx_top = self.rect.top + off
        self.points = np.concatenate([m.points for m in self.meshes])
        self.normals = np.concatenate([m.normals for m in self.meshes])
        self.jac = np.concatenate([m.jac for m in self.meshes])
        self.h = np.concatenate([np.full(m.n, m.h) for m in self.meshes])
        self.n = len(self.points)

    # -- per-alpha system ------------------------------------------------
    def dtn(self, alpha, which):
        idx = self.idx_top if which == "top" else self.idx_bottom
        return dtn_matrix(alpha, self.points[idx], self.jac[idx], self.h[idx], self.k, self.J)

    def system_matrix(self, alpha):
        Nm = self.ntd.matrix
        e = np.exp(2j * np.pi * alpha)
        L, R, Bo, T, O = (self.idx_left, self.idx_right, self.idx_bottom,
                          self.idx_top, self.idx_obstacle)
        A = np.empty((self.n, self.n), dtype=complex)
        rows = self._row_slices()
        A[rows[0]] = e * Nm[L] - Nm[R]
        blk = np.zeros((len(L), self.n), dtype=complex)
        blk[np.arange(len(L)), L] = -e
        blk[np.arange(len(L)), R] = -1.0
        A[rows[1]] = blk
        for r, idx, which in ((rows[2], Bo, "bottom"), (rows[3], T, "top")):
            blk = self.dtn(alpha, which) @ Nm[idx]
            blk[np.arange(len(idx)), idx] -= 1.0
            A[r] = blk
        A[rows[4]] = Nm[O]
        return A

    def _row_slices(self):
        sizes = [len(self.idx_left), len(self.idx_left), len(self.idx_bottom),
                 len(self.idx_top), len(self.idx_obstacle)]
        off = np.concatenate([[0], np.cumsum(sizes)])
        return [slice(off[i], off[i + 1]) for i in range(5)]

    def rhs(self, alpha, f, g, dirichlet=None):
        """Right-hand side for an incident field with traces f, scaled derivatives g.

        ``dirichlet`` overrides the obstacle rows (defaults to -f there).
        """
        e = np.exp(2j * np.pi * alpha)
        f = np.asarray(f)
        g = np.asarray(g)
        L, R, Bo, T, O = (self.idx_left, self.idx_right, self.idx_bottom,
                          self.idx_top, self.idx_obstacle)
        rows = self._row_slices()
        b = np.empty((self.n,) + f.shape[1:], dtype=complex)
        b[rows[0]] = -(e * f[L] - f[R])
        b[rows[1]] = g[R] + e * g[L]
        b[rows[2]] = g[Bo] - self.dtn(alpha, "bottom") @ f[Bo]
        b[rows[3]] = g[T] - self.dtn(alpha, "top") @ f[T]
        b[rows[4]] = -f[O] if dirichlet is None else dirichlet
        return b

    def rhs_point_source(self, alpha, xs, order="monopole"):
        direction = {"monopole": None, "dipole_x1": (1.0, 0.0),
                     "dipole_x2": (0.0, 1.0)}.get(order, order)
        if isinstance(order, str) and order not in ("monopole", "dipole_x1", "dipole_x2"):
            raise ParameterError(f"unknown source order {order!r}")
        f, g = point_source_data(self.points, self.normals, self.jac, xs, self.k, direction)
        return self.rhs(alpha, f, g)

    def factor(self, alpha):
        return CellFactor(self, alpha, sla.lu_factor(self.system_matrix(alpha), check_finite=False))

    # -- fields ----------------------------------------------------------
    def rayleigh_coeffs(self, alpha, total_trace):
        """Rayleigh coefficients from the total field on the top/bottom nodes."""
        ls = np.arange(-self.J, self.J + 1)
        out = []
        for idx in (self.idx_top, self.idx_bottom):
            E = np.exp(-1j * np.outer(alpha + ls, self.points[idx, 0]))
            w = self.h[idx] * self.jac[idx] / (2.0 * np.pi)
            out.append(E @ (w[:, None] * total_trace[idx].reshape(len(idx), -1)))
        shape = (len(ls),) + np.shape(total_trace)[1:]
        return RayleighExpansion(alpha, self.k, self.H, ls,
                                 out[0].reshape(shape), out[1].reshape(shape))


@dataclass
class CellFactor:
    cell: PeriodicCell
    alpha: float
    lu: tuple

    def solve(self, b):
        return sla.lu_solve(self.lu, b, check_finite=False)


@dataclass
class QPSolution:
    """Scattered-field boundary data of one alpha-quasi-periodic solve."""

    alpha: float
    phi: np.ndarray  # scaled normal derivative, (n_nodes, ...)
    trace: np.ndarray  # N @ phi

    def dirichlet_residual(self, cell, incident_trace):
        O = cell.idx_obstacle
        return np.abs(self.trace[O] + incident_trace[O]).max()


def solve_cell(factor, b):
    phi = factor.solve(b)
    return QPSolution(factor.alpha, phi, factor.cell.ntd.matrix @ phi)


def plane_wave(x, k, theta, gradient=False):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    kv = k * np.array([np.cos(theta), -np.sin(theta)])
    u = np.exp(1j * x @ kv)
    if gradient:
        return u, 1j * u[:, None] * kv[None, :]
    return u


def reference_alpha(k, theta):
    return reduce_alpha(k * np.cos(theta))


def solve_reference_plane(cell, theta):
    """Quasi-periodic scattered field for a plane incident wave on the periodic array."""
    alpha = reference_alpha(cell.k, theta)
    uinc = plane_wave(cell.points, cell.k, theta)
    zero = np.zeros(cell.n, dtype=complex)
    b = cell.rhs(alpha, zero, zero, dirichlet=-uinc[cell.idx_obstacle])
    return solve_cell(cell.factor(alpha), b)
