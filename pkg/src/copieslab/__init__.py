"""Numerical toolkit for large copies of finite patterns inside dense sets."""

__version__ = "0.1.0"

from .constructions import (
    AdmissibleScale,
    AnnularSet,
    BourgainSet,
    QuadraticSeq,
    ap_avoidance_certificate,
    calibrated_certificate,
    quadratic_sequence,
)
from .discrepancy import (
    TorusSequence,
    erdos_turan_bound,
    extreme_discrepancy_exact,
    final_bound,
    full_report,
    golden_quality,
    star_discrepancy_exact,
)
from .kernel import AnnulusSpec, KernelSpec, annulus_overlap, kernel_integral, kernel_value, surface_area
from .measure import mean_identity_check, meansq_identity_check
from .patterns import Pattern, Placement, find_similar_copy, find_translated_copy, rho_min_bounds
from .sampling import SamplerConfig
from .sets import BallRegion, SetOracle

__all__ = [
    "AdmissibleScale", "AnnularSet", "AnnulusSpec", "BallRegion", "BourgainSet", "KernelSpec",
    "Pattern", "Placement", "QuadraticSeq", "SamplerConfig", "SetOracle", "TorusSequence",
    "annulus_overlap", "ap_avoidance_certificate", "calibrated_certificate", "erdos_turan_bound",
    "extreme_discrepancy_exact", "final_bound", "find_similar_copy", "find_translated_copy",
    "full_report", "golden_quality", "kernel_integral", "kernel_value", "mean_identity_check",
    "meansq_identity_check", "quadratic_sequence", "rho_min_bounds", "star_discrepancy_exact",
    "surface_area",
]
