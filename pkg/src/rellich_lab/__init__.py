"""Numerical laboratory for the fourth-order Hardy-Rellich problem on the half-space."""

from .constants import (
    DimensionConfig,
    HardyConstants,
    IndicialRoots,
    beta_star,
    cone_hardy_constant,
    critical_exponent,
    hardy_constants,
    indicial_polynomial,
    indicial_roots,
    sphere_area,
    sphere_moment,
    sphere_spectrum,
)
from .errors import DegenerateProfileError, DomainError, FitRejected, SupportLossError, TruncationError
from .profiles import (
    EnergyBreakdown,
    RadialProfile,
    conformal_rescale,
    energies,
    half_mass_radius,
    hardy_ratio,
    rayleigh_quotient,
)
from .radial import GridFunction, LogGrid, derivative, integrate_weighted, reduced_laplacian

__version__ = "0.1.0"
