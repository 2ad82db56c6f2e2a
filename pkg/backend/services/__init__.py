"""
Services package for the midpoint viscous-scheme toolkit
"""
from .errors import (
    FieldShapeError,
    NumericalInstabilityError,
    SchemeError,
    StateValidityError,
    UnsupportedSchemeError,
)
from .coeffs import SchemeCoefficients, SchemeId, TermKind, Variant, catalog, coefficient_dump
from .operators import Field1D, Field2D, mixed_d2, operator_for, straight_d2
from .spectral import CurveKind, SpectralCurve, sample_curve, scheme_report
from .optimizer import SearchResult, efficiency_surface, search_straight
from .timeint import rk3_step, stable_dt
from .pde_suite import ConvergenceStudy, oa_mixed, oa_straight, run_diffusion
from .cns2d import CnsSolver, CnsState, ViscousModel
from .cases import run_case, theta_stability_scan

__version__ = "1.0.0"

__all__ = [
    "SchemeError",
    "UnsupportedSchemeError",
    "FieldShapeError",
    "NumericalInstabilityError",
    "StateValidityError",
    "SchemeId",
    "Variant",
    "TermKind",
    "SchemeCoefficients",
    "catalog",
    "coefficient_dump",
    "Field1D",
    "Field2D",
    "straight_d2",
    "mixed_d2",
    "operator_for",
    "CurveKind",
    "SpectralCurve",
    "sample_curve",
    "scheme_report",
    "SearchResult",
    "search_straight",
    "efficiency_surface",
    "rk3_step",
    "stable_dt",
    "ConvergenceStudy",
    "oa_straight",
    "oa_mixed",
    "run_diffusion",
    "CnsSolver",
    "CnsState",
    "ViscousModel",
    "run_case",
    "theta_stability_scan",
]
