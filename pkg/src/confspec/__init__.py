"""Dirichlet eigenvalues of plane domains by conformal transplantation to the
disc, and numerical evaluation of eigenvalue stability bounds."""

__version__ = "0.1.0"

from .confmap import PowerSeriesMap, ConformalWeight, make_builtin, from_spec, weight
from .quadrature import QuadratureGrid, build_grid, integrate
from .discspec import DiscBasis, Spectrum, bessel_zero, build_basis, solve_weighted, kstar
from .stability import StabilityReport, estimate_cq, full_report
from .quasidisc import ahlfors_constant, quasidisc_params

__all__ = [
    "PowerSeriesMap", "ConformalWeight", "make_builtin", "from_spec", "weight",
    "QuadratureGrid", "build_grid", "integrate",
    "DiscBasis", "Spectrum", "bessel_zero", "build_basis", "solve_weighted", "kstar",
    "StabilityReport", "estimate_cq", "full_report",
    "ahlfors_constant", "quasidisc_params",
]
