"""Inverse Floquet-Bloch transform of the periodic-array Green's function.

G(x; y) is the integral over one period of quasimomenta of the
alpha-quasi-periodic Green's functions. The quadrature in alpha splits the
period at the square-root branch points +-kappa and 1 - kappa and removes
them with cosine substitutions, so plain Gauss-Legendre converges
spectrally.

The alpha integral is taken before the boundary representation: the
weighted densities are summed first and the representation formula is
applied once per observation point.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._backend import bessel01
from .layers import potential_eval
from .quasiperiodic import point_source_data
from .special import ParameterError, gauss_legendre

logger = logging.getLogger(__name__)


def kappa_of(k):
    """The kappa in (-1/2, 1/2] with k - kappa a non-negative integer."""
    if not k > 0:
        raise ParameterError("wavenumber must be positive")
    return float(k - np.ceil(k - 0.5))


@dataclass(frozen=True)
class FBQuadrature:
    k: float
    kappa: float
    nodes: np.ndarray
    weights: np.ndarray
    n: int
    branch: str  # "split" or "single"

    def phases(self, j):
        """exp(2 pi i alpha_i j) for integer cell index j."""
        return np.exp(2j * np.pi * self.nodes * j)


def ifb_quadrature(k, n):
    """Quadrature nodes/weights for integrals over one period of alpha.

    Weights sum to one (the period has unit length).
    """
    if int(n) != n or n < 2 or n % 2:
        raise ParameterError("n must be an even integer >= 2")
    n = int(n)
    kap = kappa_of(k)
    # branch points are +-|kappa| mod 1
    a = abs(kap)
    if a in (0.0, 0.5):
        x, w = gauss_legendre(n)
        th = 0.5 * np.pi * (x + 1.0)
        wt = 0.5 * np.pi * w
        if a == 0.5:
            nodes = -0.5 * np.cos(th)
        else:
            nodes = 0.5 * (1.0 - np.cos(th))
        weights = 0.5 * np.sin(th) * wt
        branch = "single"
    else:
        x, w = gauss_legendre(n // 2)
        th = 0.5 * np.pi * (x + 1.0)
        wt = 0.5 * np.pi * w
        n1 = a * np.cos(th)
        w1 = a * np.sin(th) * wt
        n2 = 0.5 * ((2.0 * a - 1.0) * np.cos(th) + 1.0)
        w2 = 0.5 * (1.0 - 2.0 * a) * np.sin(th) * wt
        nodes = np.concatenate([n1[::-1], n2])
        weights = np.concatenate([w1[::-1], w2])
        branch = "split"
    return FBQuadrature(float(k), kap, nodes, weights, n, branch)


def _source_directions(normals, ns):
    if normals is None:
        return None
    normals = np.asarray(normals, dtype=float)
    if normals.shape != (ns, 2):
        raise ParameterError("source normals must have shape (n_sources, 2)")
    return normals


@dataclass
class GreenSamples:
    """IFB-integrated boundary data of G(.; x^s) on the cell-0 boundary nodes.

    For cell index j, ``dens[j]`` and ``trace[j]`` hold the alpha-integrated
    scattered-part data sum_i w_i exp(2 pi i alpha_i j) G_alpha_i^sc, and
    ``cphase[j]`` the matching integral of the phase (one for j = 0, tiny
    otherwise) that multiplies the free-space part Phi.
    Columns: monopoles first, then normal dipoles when source normals were
    given (d/dnu(x^s) G).
    """

    cell: object
    fbq: FBQuadrature
    sources: np.ndarray
    source_normals: np.ndarray
    dens: dict
    trace: dict
    cphase: dict
    rayleigh: list = field(default_factory=list)  # per-alpha RayleighExpansion
    per_alpha: list = None  # per-alpha densities, kept on request

    @property
    def n_sources(self):
        return len(self.sources)

    def free_part(self, points, normals=None, jac=None):
        """Phi and its source-normal derivative at points: (n_pts, n_cols)."""
        f, g = [], []
        f0, g0 = point_source_data(points, _unit(normals, points), _ones(jac, points),
                                   self.sources, self.cell.k)
        f.append(f0)
        g.append(g0)
        if self.source_normals is not None:
            f1, g1 = point_source_data(points, _unit(normals, points), _ones(jac, points),
                                       self.sources, self.cell.k, self.source_normals)
            f.append(f1)
            g.append(g1)
        return np.concatenate(f, axis=1), np.concatenate(g, axis=1)

    def boundary_values(self, j=0):
        """G and scaled d/dnu_x G on the cell-j boundary nodes (cell-0 coordinates)."""
        c = self.cphase[j]
        f, g = self.free_part(self.cell.points, self.cell.normals, self.cell.jac)
        return self.trace[j] + c * f, self.dens[j] + c * g

    def evaluate(self, targets, j=0, gradient=False, warn=True, cols=None):
        """G at points of cell j given by their cell-0 coordinates.

        ``gradient=True`` returns the x-gradient with a leading axis of 2.
        ``cols`` restricts the output to the given columns.
        """
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        sel = slice(None) if cols is None else np.atleast_1d(cols)
        val = potential_eval(targets, self.cell.meshes, self.trace[j][:, sel],
                             self.dens[j][:, sel], self.cell.k, gradient=gradient, warn=warn)
        c = self.cphase[j]
        if c == 0:
            return val
        free = self._free_at(targets, gradient, sel)
        return val + c * free

    def evaluate_scattered(self, targets, j=0, warn=False):
        """The boundary-representation part of G, without the c_j Phi term."""
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        return potential_eval(targets, self.cell.meshes, self.trace[j], self.dens[j],
                              self.cell.k, warn=warn)

    def _free_at(self, targets, gradient, sel=slice(None)):
        ns = self.n_sources
        idx = np.arange(self._ncols())[sel]
        src = idx % ns
        dip = idx >= ns
        k = self.cell.k
        d = targets[:, None, :] - self.sources[None, src, :]
        r = np.hypot(d[..., 0], d[..., 1])
        with np.errstate(invalid="ignore", divide="ignore"):
            j0, j1, y0, y1 = bessel01(k * r)
            h0 = j0 + 1j * y0
            h1 = j1 + 1j * y1
            f1 = -0.25j * k * h1
            m = (self.source_normals[src] if self.source_normals is not None
                 else np.zeros((len(src), 2)))
            dm = np.einsum("ijk,jk->ij", d, m)
            if not gradient:
                return np.where(dip[None, :], -f1 * dm / r, 0.25j * h0)
            f2 = -0.25j * k * k * (h0 - h1 / (k * r))
            out = np.empty((2, len(targets), len(idx)), dtype=complex)
            for c in range(2):
                mono = f1 * d[..., c] / r
                hess_c = (f2 - f1 / r) * d[..., c] * dm / (r * r) + f1 / r * m[None, :, c]
                out[c] = np.where(dip[None, :], -hess_c, mono)
        return out

    def _ncols(self):
        return self.n_sources * (1 if self.source_normals is None else 2)

    def far_coefficients(self, contraction=None):
        """Weighted Rayleigh data as a list of (weight, expansion) pairs.

        The series use absolute x1, so no cell phase is needed.
        ``contraction`` (n_cols, m) is applied to the coefficient columns first.
        """
        out = []
        for wi, ex in zip(self.fbq.weights, self.rayleigh):
            top, bot = ex.top, ex.bottom
            if contraction is not None:
                top = top @ contraction
                bot = bot @ contraction
            out.append((wi, type(ex)(ex.alpha, ex.k, ex.H, ex.ls, top, bot)))
        return out


def _unit(normals, points):
    return np.zeros_like(points) if normals is None else normals


def _ones(jac, points):
    return np.ones(len(points)) if jac is None else jac


def evaluate_far(pairs, x, gradient=False, margin=0.0):
    """Sum of weighted Rayleigh series at |x2| >= H - margin (absolute coordinates)."""
    total = None
    for wi, ex in pairs:
        v = wi * ex.evaluate(x, gradient=gradient, margin=margin)
        total = v if total is None else total + v
    return total


def _source_data(cell, sources, directions):
    f, g = point_source_data(cell.points, cell.normals, cell.jac, sources, cell.k)
    if directions is None:
        return f, g
    f1, g1 = point_source_data(cell.points, cell.normals, cell.jac, sources, cell.k, directions)
    return np.concatenate([f, f1], axis=1), np.concatenate([g, g1], axis=1)


def _solve_one(cell, alpha, f, g, want_rayleigh):
    fac = cell.factor(alpha)
    phi = fac.solve(cell.rhs(alpha, f, g))
    ray = None
    if want_rayleigh:
        tot = np.zeros_like(f)
        idx = np.concatenate([cell.idx_top, cell.idx_bottom])
        tot[idx] = cell.ntd.matrix[idx] @ phi + f[idx]
        ray = cell.rayleigh_coeffs(alpha, tot)
    return phi, ray


def background_green(cell, fbq, sources, source_normals=None, cells=(0,), threads=1,
                     rayleigh=True, keep_alpha=False):
    """Integrate the quasi-periodic cell solutions over alpha for a set of sources.

    ``cells`` lists the cell indices j whose boundary data are accumulated.
    Alpha solves run on ``threads`` workers; accumulation follows node order.
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    directions = _source_directions(source_normals, len(sources))
    cells = tuple(int(j) for j in cells)
    threads = max(1, int(threads or 1))
    ncol = len(sources) * (1 if directions is None else 2)
    acc = {j: np.zeros((cell.n, ncol), dtype=complex) for j in cells}
    rays = [None] * fbq.n
    kept = [None] * fbq.n if keep_alpha else None

    f, g = _source_data(cell, sources, directions)

    def job(i):
        return _solve_one(cell, fbq.nodes[i], f, g, rayleigh)

    def reduce(i, res):
        phi, ray = res
        rays[i] = ray
        if kept is not None:
            kept[i] = phi
        for j in cells:
            acc[j] += (fbq.weights[i] * np.exp(2j * np.pi * fbq.nodes[i] * j)) * phi

    if threads == 1:
        for i in range(fbq.n):
            reduce(i, job(i))
    else:
        with ThreadPoolExecutor(max_workers=min(threads, os.cpu_count() or 1) or 1) as ex:
            for start in range(0, fbq.n, threads):
                batch = list(range(start, min(start + threads, fbq.n)))
                for i, res in zip(batch, ex.map(job, batch)):
                    reduce(i, res)

    Nm = cell.ntd.matrix
    trace = {j: Nm @ acc[j] for j in cells}
    cphase = {j: complex(np.sum(fbq.weights * fbq.phases(j))) if j else 1.0 for j in cells}
    return GreenSamples(cell, fbq, sources, directions, acc, trace, cphase,
                        rays if rayleigh else [], kept)


def translate_cell(samples, j):
    """Boundary data (dens, trace) of G on cell j, in cell-0 coordinates.

    Uses G_alpha(x + 2 pi j e1) = exp(2 pi i alpha j) G_alpha(x) node by node.
    """
    j = int(j)
    if j not in samples.dens:
        if samples.per_alpha is None:
            raise ParameterError(
                f"cell {j} was not accumulated and per-alpha data were not kept")
        ph = samples.fbq.weights * samples.fbq.phases(j)
        dens = sum(p * phi for p, phi in zip(ph, samples.per_alpha))
        samples.dens[j] = dens
        samples.trace[j] = samples.cell.ntd.matrix @ dens
        samples.cphase[j] = complex(ph.sum())
    return samples.dens[j], samples.trace[j]


def green_matrix(samples, targets, j=0, warn=True):
    """Convenience: G(targets; sources) as an (n_targets, n_sources) matrix."""
    return samples.evaluate(targets, j=j, warn=warn)[:, :samples.n_sources]
