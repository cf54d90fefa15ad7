from .first import (VARIANT_PLAIN, VARIANT_WEIGHTED, AsymptoticReport, FirstMomentParams, RateResult,
                    asymptotic_terms, first_moment_rate, solve_first_moment, variant_gap)
from .overlap import (AffineReport, FeasibleBasis, Overlap, check_affine, clone_classes, feasible_basis,
                      product_overlap)
from .rough import (BoundaryCheck, MiddleGroundScan, PsiInput, PsiSup, boundary_check, boundary_psi, fhat_at,
                    fhat_scan, rough_bound_fhat, scan_middle_ground, separability_psi, sup_psi)
from .second import class_probabilities, second_moment_f, slot_expectations
from .checks import (ConcavityReport, StationaryReport, TameReport, check_concavity, check_stationary, hessian,
                     is_tame)
from .regular import RegularScan, regular_threshold, regular_xi

__all__ = [
    "VARIANT_PLAIN", "VARIANT_WEIGHTED", "AsymptoticReport", "FirstMomentParams", "RateResult",
    "asymptotic_terms", "first_moment_rate", "solve_first_moment", "variant_gap",
    "AffineReport", "FeasibleBasis", "Overlap", "check_affine", "clone_classes", "feasible_basis",
    "product_overlap",
    "BoundaryCheck", "MiddleGroundScan", "PsiInput", "PsiSup", "boundary_check", "boundary_psi", "fhat_at", "fhat_scan", "rough_bound_fhat",
    "scan_middle_ground", "separability_psi", "sup_psi",
    "class_probabilities", "second_moment_f", "slot_expectations",
    "ConcavityReport", "StationaryReport", "TameReport", "check_concavity", "check_stationary", "hessian",
    "is_tame",
    "RegularScan", "regular_threshold", "regular_xi",
]
