"""Numerical potential theory on planar domains.

Logarithmic, Green and Dirichlet capacities, Green functions and capacity
potentials on graded grids, Bergman kernels and distances, capacity density
indices of boundary points, and a configuration-driven command-line runner.
"""
from .bergman import (
    BasisSpec, BergmanKernel, ConformalBergmanKernel, bergman_distance, bergman_metric, build_bergman_model,
    kernel_diag,
)
from .capacity import (
    EquilibriumMeasure, FeketePoints, dirichlet_capacity, equilibrium_measure, green_capacity, green_energy,
    log_capacity, transfinite_diameter,
)
from .density import (
    CapacityDensity, DecayRegressor, chain_lower_bound, density_profile, fit_green_decay, weak_strong_density,
)
from .exceptions import (
    ConfigurationError, DomainError, NumericError, PlanarPotError, PolarSetError, PreconditionError,
)
from .geometry import (
    AmbientDisk, AmbientRect, CombTeeth, CompactSet, Disk, Domain, IntervalFamily, PointCloud, Segment,
    annulus, boundary_distance, boundary_trace, carleson_totik, comb_domain, punctured_disk, sample_boundary,
    slit_disk, square, unit_disk,
)
from .grid import Contour, GridSpec
from .potential import GreenFunction, capacity_potential, flux, green_function, solve_dirichlet

__version__ = "0.1.0"

__all__ = [
    "AmbientDisk", "AmbientRect", "annulus", "BasisSpec", "bergman_distance", "bergman_metric",
    "BergmanKernel", "boundary_distance", "boundary_trace", "build_bergman_model", "capacity_potential",
    "CapacityDensity", "carleson_totik", "chain_lower_bound", "comb_domain", "CombTeeth", "CompactSet",
    "ConfigurationError", "ConformalBergmanKernel", "Contour", "DecayRegressor", "density_profile",
    "dirichlet_capacity", "Disk", "Domain", "DomainError", "equilibrium_measure", "EquilibriumMeasure",
    "FeketePoints", "fit_green_decay", "flux", "green_capacity", "green_energy", "green_function",
    "GreenFunction", "GridSpec", "IntervalFamily", "kernel_diag", "log_capacity", "NumericError",
    "PlanarPotError", "PointCloud", "PolarSetError", "PreconditionError", "punctured_disk", "sample_boundary",
    "Segment", "slit_disk", "solve_dirichlet", "square", "transfinite_diameter", "unit_disk",
    "weak_strong_density",
]
