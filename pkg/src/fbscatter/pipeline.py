"""End-to-end solves: background Green's function, TBC solve, probes, grids, timings."""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .floquet import background_green, ifb_quadrature
from .layers import potential_eval
from .propagate import FieldPropagator
from .quasiperiodic import PeriodicCell, plane_wave, point_source_data, solve_reference_plane
from .tbc import (GreenReference, PlaneReference, assemble_tbc, interior_ntd,
                  solve_cylindrical, solve_plane, solve_with_reference)

logger = logging.getLogger(__name__)


class NumericalFailure(RuntimeError):
    pass


def trig_interp(values, t_new):
    """Trigonometric interpolation of samples at t_j = 2 pi j / n."""
    n = len(values)
    c = np.fft.fft(values) / n
    m = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        # split the Nyquist term symmetrically
        nyq = n // 2
        c = np.concatenate([c, [c[nyq] / 2]])
        c[nyq] /= 2
        m = np.concatenate([m, [nyq]])
        m[nyq] = -nyq
    return np.exp(1j * np.outer(t_new, m)) @ c


def probe_parameters(count):
    return 2.0 * np.pi * np.arange(count) / count


def route_of(cfg):
    if cfg.kind == "plane":
        return "plane"
    inside = geometry.contains(cfg.curve("artificial"), cfg.source[None])[0]
    return "cylindrical" if inside else "green_reference"


class CellCache:
    """Reuses cell assemblies across runs that share k, H, M, N, p, J_trunc."""

    def __init__(self):
        self._store = {}

    def get(self, cfg):
        key = (cfg.k, cfg.H, cfg.M, cfg.N, cfg.p, cfg.J_trunc,
               repr(sorted(cfg.geometry["periodic"].items())))
        if key not in self._store:
            self._store[key] = PeriodicCell(cfg.curve("periodic"), cfg.k, cfg.H, cfg.M,
                                            cfg.N, cfg.p, cfg.J_trunc)
        return self._store[key]


@dataclass
class RunResult:
    cfg: object
    route: str
    cell: object
    fbq: object
    samples: object
    solution: object
    gamma_curve: object
    gamma_mesh: object
    timings: dict = field(default_factory=dict)
    _prop: object = None

    @property
    def propagator(self):
        if self._prop is None:
            self._prop = FieldPropagator(self.solution, self.samples, self.gamma_curve,
                                         self.cfg.curve("perturbed"))
        return self._prop

    def probe_values(self, count=None):
        """Total field at uniformly spaced parameter values on the artificial curve."""
        count = count or self.cfg.probes
        tr = self.solution.trace[:self.gamma_mesh.n]
        if self.gamma_mesh.curve.corners:
            raise NumericalFailure("probe interpolation needs a smooth artificial curve")
        return trig_interp(tr, probe_parameters(count))

    def probe_points(self, count=None):
        count = count or self.cfg.probes
        return self.gamma_curve(probe_parameters(count))

    def grid(self, per_cell=None, cells=None, x2_range=None):
        cfg = self.cfg
        nx, ny = per_cell or cfg.grid["per_cell"]
        j0, j1 = cells or (cfg.cells[0], cfg.cells[1])
        lo, hi = x2_range or cfg.grid.get("x2_range") or (-cfg.H, cfg.H)
        x2 = lo + (np.arange(ny) + 0.5) * (hi - lo) / ny
        x1 = np.concatenate([2 * np.pi * j - np.pi + (np.arange(nx) + 0.5) * 2 * np.pi / nx
                             for j in range(int(j0), int(j1) + 1)])
        X1, X2 = np.meshgrid(x1, x2)
        return np.column_stack([X1.ravel(), X2.ravel()])

    def field_on_grid(self, **kw):
        pts = self.grid(**kw)
        cells = kw.get("cells") or (self.cfg.cells[0], self.cfg.cells[1])
        jj = self.propagator.cell_index(pts[:, 0])
        if jj.min() < cells[0] or jj.max() > cells[1]:
            raise ValueError("grid window outside computed cells")
        return pts, self.propagator.evaluate(pts)


def solve(cfg, cache=None, cells=None, rayleigh=None, threads=None):
    """Full non-quasi-periodic solve. Returns a RunResult with T_nq recorded."""
    cache = cache or CellCache()
    route = route_of(cfg)
    cells = tuple(cfg.cell_range if cells is None else cells)
    rayleigh = True if rayleigh is None else rayleigh
    threads = threads or cfg.threads
    t0 = time.perf_counter()
    cell = cache.get(cfg)
    t_cell = time.perf_counter()
    fbq = ifb_quadrature(cfg.k, cfg.n)
    gamma_curve = cfg.curve("artificial")
    gm = geometry.build_mesh(gamma_curve, cfg.N_p, cfg.p, segment_label=0)
    ob = geometry.build_mesh(cfg.curve("perturbed"), cfg.m_perturbed, cfg.p, normal="inward")
    sources, normals = gm.points, gm.normals
    if cfg.kind == "cylindrical":
        sources = np.vstack([sources, cfg.source])
        normals = np.vstack([normals, [1.0, 0.0]])
    samples = background_green(cell, fbq, sources, normals, cells=cells, threads=threads,
                               rayleigh=rayleigh)
    t_green = time.perf_counter()
    tbc = assemble_tbc(gm, cfg.k, samples)
    inner = interior_ntd(gm, ob, cfg.k)
    if route == "cylindrical":
        sol = solve_cylindrical(cfg.source, cfg.k, tbc, inner)
    elif route == "green_reference":
        ref = GreenReference(samples, gm.n)
        sol = solve_with_reference(ref, cfg.k, tbc, inner, "green_reference",
                                   source=cfg.source)
    else:
        theta = cfg.incidence["theta"]
        ref = PlaneReference(cell, solve_reference_plane(cell, theta), theta)
        sol = solve_plane(theta, cfg.k, tbc, inner, ref)
    t_end = time.perf_counter()
    if not np.all(np.isfinite(sol.trace)):
        raise NumericalFailure("non-finite boundary data")
    timings = {"T_nq": t_end - t0, "cell_assembly": t_cell - t0,
               "green": t_green - t_cell, "tbc_solve": t_end - t_green}
    return RunResult(cfg, route, cell, fbq, samples, sol, gamma_curve, gm, timings)


def time_single_alpha(cfg):
    """Wall clock of one quasi-periodic problem: assembly, factor, solve, probe evaluation."""
    t0 = time.perf_counter()
    cell = PeriodicCell(cfg.curve("periodic"), cfg.k, cfg.H, cfg.M, cfg.N, cfg.p, cfg.J_trunc)
    pts = cfg.curve("artificial")(probe_parameters(cfg.probes))
    if cfg.kind == "plane":
        sol = solve_reference_plane(cell, cfg.incidence["theta"])
        trace, phi = sol.trace, sol.phi
    else:
        alpha = ifb_quadrature(cfg.k, cfg.n).nodes[0]
        f, g = point_source_data(cell.points, cell.normals, cell.jac, cfg.source, cfg.k)
        phi = cell.factor(alpha).solve(cell.rhs(alpha, f, g))
        trace = cell.ntd.matrix @ phi
    potential_eval(pts, cell.meshes, trace, phi, cfg.k, warn=False)
    return time.perf_counter() - t0


def e_rel(u, u_ref):
    return float(np.max(np.abs(u - u_ref)) / np.max(np.abs(u_ref)))


@dataclass
class ConvergenceRecord:
    variable: str
    values: list
    e_rel: list
    wall: list
    reference: dict


def converge(cfg, variable, values, reference, cache=None, threads=None):
    """Self-convergence of the probe values on the artificial curve."""
    if reference < max(values):
        raise ValueError("reference value must be >= every sweep value")
    cache = cache or CellCache()
    t0 = time.perf_counter()
    ref_cfg = cfg.with_value(variable, reference)
    ref = solve(ref_cfg, cache, cells=(0,), rayleigh=False, threads=threads)
    u_ref = ref.probe_values()
    ref_desc = {variable: reference, "wall_s": time.perf_counter() - t0}
    errs, walls = [], []
    for v in values:
        if v == reference:
            continue
        t = time.perf_counter()
        run = solve(cfg.with_value(variable, v), cache, cells=(0,), rayleigh=False,
                    threads=threads)
        errs.append(e_rel(run.probe_values(), u_ref))
        walls.append(time.perf_counter() - t)
        logger.info("%s=%s E_rel=%.3e", variable, v, errs[-1])
    vals = [v for v in values if v != reference]
    return ConvergenceRecord(variable, vals, errs, walls, ref_desc)


def incident_field(cfg, pts):
    if cfg.kind == "plane":
        return plane_wave(pts, cfg.k, cfg.incidence["theta"])
    f, _ = point_source_data(pts, np.zeros_like(pts), np.ones(len(pts)), cfg.source, cfg.k)
    return f[:, 0]
