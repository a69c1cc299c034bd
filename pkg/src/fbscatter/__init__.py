"""Time-harmonic scattering by a locally perturbed periodic array of sound-soft obstacles.

The solver reduces the unbounded problem to a transparent boundary condition on
a closed curve around the perturbed obstacle, built from the Green's function
of the unperturbed array, which is itself assembled from quasi-periodic cell
solves by an inverse Floquet-Bloch transform.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .config import ConfigError, RunConfig
from .floquet import background_green, ifb_quadrature
from .geometry import build_mesh, builtin_curve
from .layers import IllConditionedError, NtDMatrix, assemble
from .pipeline import NumericalFailure, converge, solve
from .propagate import FieldPropagator
from .quasiperiodic import PeriodicCell, solve_reference_plane
from .special import ParameterError, SingularityError, fundamental_solution
from .tbc import assemble_tbc, interior_ntd

__all__ = [
    "BACKEND", "ConfigError", "RunConfig", "background_green", "ifb_quadrature",
    "build_mesh", "builtin_curve", "IllConditionedError", "NtDMatrix", "assemble",
    "NumericalFailure", "converge", "solve", "FieldPropagator", "PeriodicCell",
    "solve_reference_plane", "ParameterError", "SingularityError", "fundamental_solution",
    "assemble_tbc", "interior_ntd",
]
