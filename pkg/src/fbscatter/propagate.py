"""Field evaluation outside the enclosed region, in any cell.

The outgoing part of the perturbed field is represented on the artificial
curve with the periodic-array Green's function. The leap evaluates it
directly on the boundary nodes of cell j; the pullback then fills the cell
interior with free-space kernels; the far strip |x2| > H uses the Rayleigh
series of the quasi-periodic Green's functions.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .floquet import evaluate_far
from .layers import potential_eval
from .special import ParameterError
from .tbc import eval_interior

TWO_PI = 2.0 * np.pi


@dataclass
class CellField:
    """Total field data on the boundary nodes of cell j (cell-0 coordinates).

    ``og_*`` hold the outgoing part, ``trace``/``dens`` the total field.
    """

    j: int
    og_trace: np.ndarray
    og_dens: np.ndarray
    trace: np.ndarray
    dens: np.ndarray

    def obstacle_residual(self, cell):
        O = cell.idx_obstacle
        return np.abs(self.trace[O]).max() / max(np.abs(self.trace).max(), 1e-300)


class FieldPropagator:
    """Evaluate the perturbed total field anywhere in the periodic domain.

    ``samples`` hold G for sources at the artificial-curve nodes (monopoles
    in columns [0, n_p), normal dipoles in [n_s, n_s + n_p)).
    """

    def __init__(self, solution, samples, gamma_curve, perturbed_curve):
        self.sol = solution
        self.samples = samples
        self.cell = samples.cell
        self.gamma_mesh = solution.interior.meshes[0]
        self.gamma_curve = gamma_curve
        self.perturbed_curve = perturbed_curve
        mesh = self.gamma_mesh
        n_p = mesh.n
        ns = samples.n_sources
        c = np.zeros(2 * ns, dtype=complex)
        c[:n_p] = -mesh.h * solution.og_dens
        c[ns:ns + n_p] = mesh.h * mesh.jac * solution.og_trace
        self.contraction = c
        # the Rayleigh series may be continued below |x2| = H, but not down to
        # the sources and obstacles
        top = max(np.abs(mesh.points[:, 1]).max(),
                  np.abs(self.cell.obstacle.points[:, 1]).max())
        T = self.cell.idx_top
        spacing = np.abs(np.diff(self.cell.points[T, 0])).max()
        self.margin = max(0.0, min(0.5 * (self.cell.H - top), 2.0 * spacing))
        self._far_pairs = None
        self._cells = {}

    # -- leap ------------------------------------------------------------
    def leap(self, j):
        j = int(j)
        if j in self._cells:
            return self._cells[j]
        s = self.samples
        if j not in s.dens:
            raise ParameterError(f"cell {j} was not included in the alpha integration")
        c = self.contraction
        f, g = s.free_part(self.cell.points, self.cell.normals, self.cell.jac)
        og_t = s.trace[j] @ c + s.cphase[j] * (f @ c)
        og_d = s.dens[j] @ c + s.cphase[j] * (g @ c)
        ref_t, ref_d = self.sol.reference.cell_boundary(self.cell, j)
        cf = CellField(j, og_t, og_d, og_t + ref_t, og_d + ref_d)
        self._cells[j] = cf
        return cf

    # -- pullback --------------------------------------------------------
    def pullback(self, targets, j, warn=True):
        """Total field at points of cell j in the strip, outside the enclosed region."""
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        local = targets - np.array([TWO_PI * j, 0.0])
        cf = self.leap(j)
        cell = self.cell
        if j == 0:
            R = slice(len(cell.idx_obstacle), cell.n)
            meshes = [cell.rect.mesh, self.gamma_mesh.flipped()]
            tr = np.concatenate([cf.og_trace[R], self.sol.og_trace])
            dn = np.concatenate([cf.og_dens[R], -self.sol.og_dens])
        else:
            meshes = cell.meshes
            tr, dn = cf.og_trace, cf.og_dens
        og = potential_eval(local, meshes, tr, dn, cell.k, warn=warn)
        return og + self.sol.reference.evaluate(local, j)

    # -- far strip -------------------------------------------------------
    def far_strip(self, targets, margin=0.0):
        """Total field from the Rayleigh series, |x2| >= H - margin."""
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        if margin > self.margin or np.any(np.abs(targets[:, 1]) < self.cell.H - margin):
            raise ParameterError("far-strip evaluation needs |x2| >= H")
        if self._far_pairs is None:
            if not self.samples.rayleigh:
                raise ParameterError("Rayleigh data were not stored with the Green samples")
            self._far_pairs = self.samples.far_coefficients(self.contraction[:, None])
        og = evaluate_far(self._far_pairs, targets, margin=margin)[:, 0]
        return og + self.sol.reference.evaluate_far(targets, margin=margin)

    # -- dispatch --------------------------------------------------------
    def cell_index(self, x1):
        return np.floor((np.asarray(x1) + np.pi) / TWO_PI).astype(int)

    def evaluate(self, points, warn=False):
        """Total field at arbitrary points; NaN inside obstacles."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(len(pts), np.nan + 0j)
        H = self.cell.H
        # points close to the top/bottom lines go through the continued series,
        # where the boundary representation loses accuracy
        far = np.abs(pts[:, 1]) >= H - self.margin
        if np.any(far):
            out[far] = self.far_strip(pts[far], margin=self.margin)
        jj = self.cell_index(pts[:, 0])
        for j in np.unique(jj[~far]):
            sel = (~far) & (jj == j)
            local = pts[sel] - np.array([TWO_PI * j, 0.0])
            vals = np.full(len(local), np.nan + 0j)
            if j == 0:
                inner = geometry.contains(self.gamma_curve, local)
                hole = geometry.contains(self.perturbed_curve, local)
                m_in = inner & ~hole
                if np.any(m_in):
                    vals[m_in] = eval_interior(self.sol, local[m_in], warn=warn)
                m_out = ~inner
            else:
                m_out = ~geometry.contains(self.cell.obstacle_curve, local)
            if np.any(m_out):
                vals[m_out] = self.pullback(pts[sel][m_out], int(j), warn=warn)
            out[sel] = vals
        return out


def leap(propagator, j):
    return propagator.leap(j)


def pullback(propagator, targets, j):
    return propagator.pullback(targets, j)


def far_strip(propagator, targets):
    return propagator.far_strip(targets)
