"""Critical curves of the exponential curvature energy in 2-space forms and
the rotational surfaces of constant skew curvature they generate."""

from __future__ import annotations

from .classify import CurveType, classify, find_figure_eight, borderline_level
from .energy import EnergyProblem, constant_solutions
from .errors import SkewformError
from .phase import BranchDescriptor, components, stationary_points
from .surface import revolve, verify_surface
from .trace import ProfileCurve, TraceOptions, integrate_profile, psi_at_zero, reflect_complete

__version__ = "0.1.0"

__all__ = [
    "BranchDescriptor",
    "CurveType",
    "EnergyProblem",
    "ProfileCurve",
    "SkewformError",
    "TraceOptions",
    "borderline_level",
    "classify",
    "components",
    "constant_solutions",
    "find_figure_eight",
    "integrate_profile",
    "psi_at_zero",
    "reflect_complete",
    "revolve",
    "stationary_points",
    "verify_surface",
]
