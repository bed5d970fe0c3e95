"""Relativistic complex-scaling spectra in a tridiagonal Laguerre spinor basis."""
from .basis import FINE_STRUCTURE, BasisParams, PhysicsParams, make_basis_params
from .errors import (
    ConfigError,
    CouplingTooStrong,
    EigFailure,
    InvalidBasis,
    MatchFailure,
    NoRoot,
    NumericalError,
    OverlapSingular,
    PotentialSingular,
    RCSError,
)
from .oracles import hydrogen_exact, nonrel_limit, ws_nonrel_exact
from .potentials import PotentialSpec, convert_nuclear, power_exp, woods_saxon
from .spectral import ScalingParams, Tolerances, solve_spectrum, stabilize, theta_sweep

__version__ = "0.1.0"
