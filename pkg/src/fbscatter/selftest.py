"""Fast installation check: a handful of identities that run in a few seconds."""

import numpy as np

from . import geometry
from ._backend import BACKEND
from .floquet import ifb_quadrature
from .layers import NtDMatrix, assemble
from .quasiperiodic import PeriodicCell, solve_reference_plane
from .special import bessel

# mpmath, 30 digits
_BESSEL_AT_ONE = {"J0": 0.76519768655796655145, "J1": 0.44005058574493351596,
                  "Y0": 0.088256964215676957983, "Y1": -0.78121282130028871655}
_CIRCLE_EIG = {0: -0.5239668731752997 + 1.3106557135004935j,
               1: 0.9374194222096909 + 0.8191266602041908j}


def check_bessel():
    return max(abs(bessel(kind, 1.0) - v) for kind, v in _BESSEL_AT_ONE.items())


def check_circle_eigenvalue():
    mesh = geometry.build_mesh(geometry.disk(1.0), 128)
    S = assemble([mesh], 1.25).S
    err = 0.0
    for m, lam in _CIRCLE_EIG.items():
        v = np.exp(1j * m * mesh.t)
        err = max(err, np.abs(S @ v - lam * v).max() / abs(lam))
    return err


def check_ifb_weights():
    return max(abs(ifb_quadrature(k, 16).weights.sum() - 1.0) for k in (1.25, 1.5, 2.0))


def check_manufactured_ntd():
    from .quasiperiodic import point_source_data
    mesh = geometry.build_mesh(geometry.square(2.0), 512)
    z0 = np.array([2.5, 0.7])
    f, g = point_source_data(mesh.points, mesh.normals, mesh.jac, z0, 2.0)
    N = NtDMatrix(assemble([mesh], 2.0))
    return np.abs(N @ g[:, 0] - f[:, 0]).max() / np.abs(f).max()


def check_energy():
    cell = PeriodicCell(geometry.disk(1.0), 1.25, np.pi, M=64, N=256, J=15)
    sol = solve_reference_plane(cell, np.pi / 3)
    ray = cell.rayleigh_coeffs(sol.alpha, sol.trace)
    return abs(ray.energy_balance(np.pi / 3) - 1.0)


CHECKS = [
    ("bessel values at z=1", check_bessel, 1e-15),
    ("circle single-layer eigenvalues (128 nodes)", check_circle_eigenvalue, 1e-10),
    ("alpha-quadrature weights sum to one", check_ifb_weights, 1e-13),
    ("manufactured NtD on a square (graded)", check_manufactured_ntd, 1e-8),
    ("plane-wave energy balance", check_energy, 1e-8),
]


def run_all(verbose=False):
    ok = True
    if verbose:
        print(f"kernel backend: {BACKEND}")
    for name, fn, tol in CHECKS:
        err = fn()
        passed = bool(err <= tol)
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}: {err:.2e} (tol {tol:.0e})")
    return ok
