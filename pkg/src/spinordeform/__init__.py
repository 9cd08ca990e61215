"""Spinor fields on a deformed Lorentzian frame geometry."""

from .connection import Geometry, SpinConnection, concordance_residuals
from .deformation import Perturbation, deformed_geometry, first_order_suite
from .dirac_matter import PhysicalConstants, lagrangian_density, plane_wave, stress_tensor
from .frame_geometry import ChartPoint, Field, FrameField, commutation_coefficients, coordinate_frame

__all__ = [
    "ChartPoint",
    "Field",
    "FrameField",
    "Geometry",
    "Perturbation",
    "PhysicalConstants",
    "SpinConnection",
    "commutation_coefficients",
    "concordance_residuals",
    "coordinate_frame",
    "deformed_geometry",
    "first_order_suite",
    "lagrangian_density",
    "plane_wave",
    "stress_tensor",
]
