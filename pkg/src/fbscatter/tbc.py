"""Transparent boundary condition on the artificial curve and the perturbed-cell solves.

The artificial curve encloses the perturbed obstacle of cell 0. Outside it,
any field that is outgoing with respect to the unperturbed periodic array
satisfies (Kt - I) u = St du/dnu, with St, Kt the single and double layers
built on the periodic-array Green's function. Inside, the free-space NtD map
of the region between the artificial curve and the perturbed obstacle
closes the system.

Normals on the artificial curve point away from the enclosed region; on the
perturbed obstacle they point into the obstacle.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .floquet import evaluate_far
from .layers import COND_LIMIT, IllConditionedError, NtDMatrix, assemble, potential_eval
from .quasiperiodic import plane_wave, point_source_data
from .special import ParameterError

logger = logging.getLogger(__name__)


def _lu_checked(A, what):
    lu = sla.lu_factor(A, check_finite=False)
    rcond, _ = sla.lapack.zgecon(lu[0], np.linalg.norm(A, 1), norm="1")
    if rcond == 0 or 1.0 / rcond > COND_LIMIT:
        raise IllConditionedError(f"{what} is numerically singular")
    return lu


@dataclass
class TbcMatrices:
    S: np.ndarray
    K: np.ndarray
    N: np.ndarray  # (K - I)^{-1} S
    mesh: object


def assemble_tbc(mesh, k, samples=None):
    """Single/double layers with the periodic Green's function on the artificial curve.

    ``samples`` must hold G for sources at the mesh nodes (first columns)
    with the mesh normals as dipole directions. Without samples only the
    free-space parts are assembled.
    """
    n = mesh.n
    if samples is not None and (samples.n_sources < n or samples.source_normals is None):
        raise ParameterError("Green samples must include monopoles and dipoles on the curve")
    lay = assemble([mesh], k)
    S = lay.S.copy()
    K = lay.K.copy()
    if samples is not None:
        cols = samples.evaluate_scattered(mesh.points)
        ns = samples.n_sources
        gs = cols[:, :n]
        dgs = cols[:, ns:ns + n]
        S += 2.0 * mesh.h * gs
        K += 2.0 * mesh.h * dgs * mesh.jac[None, :]
    lu = _lu_checked(K - np.eye(n), "K - I on the artificial curve")
    return TbcMatrices(S, K, sla.lu_solve(lu, S, check_finite=False), mesh)


@dataclass
class InteriorNtD:
    meshes: list
    ntd: NtDMatrix
    n1: int  # nodes on the artificial curve (listed first)

    @property
    def matrix(self):
        return self.ntd.matrix


def interior_ntd(gamma_mesh, obstacle_mesh, k):
    """Free-space NtD on the region between the artificial curve and the obstacle."""
    meshes = [gamma_mesh, obstacle_mesh]
    return InteriorNtD(meshes, NtDMatrix(assemble(meshes, k)), gamma_mesh.n)


# -- reference fields --------------------------------------------------------
# A reference is an unperturbed-array field; the difference to the perturbed
# total field is outgoing outside the artificial curve.


class NoReference:
    """Zero reference (source inside the enclosed region)."""

    def boundary(self, points, normals, jac):
        z = np.zeros(len(points), dtype=complex)
        return z, z.copy()

    def cell_boundary(self, cell, j):
        z = np.zeros(cell.n, dtype=complex)
        return z, z.copy()

    def evaluate(self, targets, j=0):
        return np.zeros(len(np.atleast_2d(targets)), dtype=complex)

    def evaluate_far(self, targets, margin=0.0):
        return np.zeros(len(np.atleast_2d(targets)), dtype=complex)


class PlaneReference:
    """Plane wave scattered by the unperturbed array (alpha_ref-quasi-periodic)."""

    def __init__(self, cell, solution, theta):
        self.cell = cell
        self.sol = solution
        self.theta = theta
        self.alpha = solution.alpha
        self.k = cell.k
        uinc = plane_wave(cell.points, cell.k, theta)
        self.ray = cell.rayleigh_coeffs(self.alpha, solution.trace)
        self._uinc_nodes = uinc

    def _phase(self, j):
        return np.exp(2j * np.pi * self.alpha * j)

    def _scattered(self, pts, gradient=False):
        return potential_eval(pts, self.cell.meshes, self.sol.trace, self.sol.phi, self.k,
                              gradient=gradient, warn=False)

    def boundary(self, points, normals, jac):
        u, g = plane_wave(points, self.k, self.theta, gradient=True)
        us = self._scattered(points)
        gs = self._scattered(points, gradient=True)
        dn = np.einsum("ij,ij->i", g, normals) + gs[0] * normals[:, 0] + gs[1] * normals[:, 1]
        return u + us, jac * dn

    def cell_boundary(self, cell, j):
        _, g = plane_wave(cell.points, self.k, self.theta, gradient=True)
        ginc = cell.jac * np.einsum("ij,ij->i", g, cell.normals)
        ph = self._phase(j)
        return ph * (self._uinc_nodes + self.sol.trace), ph * (ginc + self.sol.phi)

    def evaluate(self, targets, j=0):
        targets = np.atleast_2d(targets)
        return self._phase(j) * (plane_wave(targets, self.k, self.theta)
                                 + self._scattered(targets))

    def evaluate_far(self, targets, margin=0.0):
        return (plane_wave(targets, self.k, self.theta)
                + self.ray.evaluate(targets, margin=margin))


class GreenReference:
    """Unperturbed-array Green's function G(.; x*) (source outside the enclosed region)."""

    def __init__(self, samples, column):
        self.samples = samples
        self.col = column

    def boundary(self, points, normals, jac):
        u = self.samples.evaluate(points, warn=False, cols=self.col)[:, 0]
        g = self.samples.evaluate(points, gradient=True, warn=False, cols=self.col)[:, :, 0]
        return u, jac * (g[0] * normals[:, 0] + g[1] * normals[:, 1])

    def cell_boundary(self, cell, j):
        tr, dn = self.samples.boundary_values(j)
        return tr[:, self.col], dn[:, self.col]

    def evaluate(self, targets, j=0):
        return self.samples.evaluate(targets, j=j, warn=False, cols=self.col)[:, 0]

    def evaluate_far(self, targets, margin=0.0):
        sel = np.zeros((self.samples.rayleigh[0].top.shape[1], 1))
        sel[self.col] = 1.0
        return evaluate_far(self.samples.far_coefficients(sel), targets, margin=margin)[:, 0]


@dataclass
class PerturbedSolution:
    """Boundary data of the perturbed total field.

    ``trace``/``dens`` are total-field values on [artificial curve; obstacle]
    nodes; ``og_trace``/``og_dens`` the outgoing part (total minus reference)
    on the artificial curve. Inside the enclosed region the total field is
    ``incident + representation(sc_trace, sc_dens)``.
    """

    kind: str
    k: float
    interior: InteriorNtD
    trace: np.ndarray
    dens: np.ndarray
    sc_trace: np.ndarray
    sc_dens: np.ndarray
    og_trace: np.ndarray
    og_dens: np.ndarray
    reference: object
    source: np.ndarray = None
    theta: float = None
    residual: float = 0.0

    def incident(self, targets):
        if self.kind == "cylindrical":
            t = np.atleast_2d(targets)
            f, _ = point_source_data(t, np.zeros_like(t), np.ones(len(t)), self.source, self.k)
            return f[:, 0]
        return np.zeros(len(np.atleast_2d(targets)), dtype=complex)


def _coupled_solve(tbc, inner, rhs1, rhs2):
    A = inner.matrix.astype(complex, copy=True)
    n1 = inner.n1
    A[:n1, :n1] -= tbc.N
    b = np.concatenate([rhs1, rhs2])
    lu = _lu_checked(A, "coupled TBC system")
    x = sla.lu_solve(lu, b, check_finite=False)
    res = np.linalg.norm(A @ x - b, np.inf) / max(np.linalg.norm(b, np.inf), 1e-300)
    return x, res


def _stacked(inner):
    pts = np.concatenate([m.points for m in inner.meshes])
    nu = np.concatenate([m.normals for m in inner.meshes])
    jac = np.concatenate([m.jac for m in inner.meshes])
    return pts, nu, jac


def solve_cylindrical(xstar, k, tbc, inner):
    """Point source inside the enclosed region: unknowns are the scattered densities."""
    xstar = np.asarray(xstar, dtype=float)
    pts, nu, jac = _stacked(inner)
    f, g = point_source_data(pts, nu, jac, xstar, k)
    f, g = f[:, 0], g[:, 0]
    n1 = inner.n1
    phi, res = _coupled_solve(tbc, inner, tbc.N @ g[:n1] - f[:n1], -f[n1:])
    u = inner.matrix @ phi
    return PerturbedSolution("cylindrical", k, inner, u + f, phi + g, u, phi,
                             (u + f)[:n1], (phi + g)[:n1], NoReference(), xstar, None, res)


def solve_with_reference(reference, k, tbc, inner, kind, source=None, theta=None):
    """No source in the enclosed region: unknowns are the total densities.

    ``reference`` supplies the unperturbed-array total field on the curve.
    """
    pts, nu, jac = _stacked(inner)
    n1 = inner.n1
    m1 = inner.meshes[0]
    ref_u, ref_g = reference.boundary(m1.points, m1.normals, m1.jac)
    phi, res = _coupled_solve(tbc, inner, ref_u - tbc.N @ ref_g,
                              np.zeros(len(pts) - n1, dtype=complex))
    u = inner.matrix @ phi
    return PerturbedSolution(kind, k, inner, u, phi, u, phi, u[:n1] - ref_u, phi[:n1] - ref_g,
                             reference, source, theta, res)


def solve_plane(theta, k, tbc, inner, reference):
    return solve_with_reference(reference, k, tbc, inner, "plane", theta=theta)


def eval_interior(solution, targets, warn=True):
    """Total field at points inside the enclosed region."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    val = potential_eval(targets, solution.interior.meshes, solution.sc_trace,
                         solution.sc_dens, solution.k, warn=warn)
    if solution.kind == "cylindrical":
        val = val + solution.incident(targets)
    return val
