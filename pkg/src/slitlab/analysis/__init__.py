"""Branch tracking and diagnostic audits."""

from .annulus import AnnulusForms, AnnulusSample, annulus_forms, constant_forms_closed, sample_annulus, sample_callable
from .audits import (ConvexityReport, ModeReport, VariationReport, boundary_X, convexity_report, convexity_slacks,
                     fd_derivative, hf_derivative, mode_estimates, nonconcentration_report, variation_audit)
from .branches import BranchSet, Extrapolation, extrapolate_limit, greedy_match, track_branches
from .closed_form import half_rectangle_spectra, min_relative_gap, mixed_rectangle_spectrum, rectangle_spectrum
from .symmetry import GapScan, SymmetryReport, gap_scan, spectrum_gaps, symmetry_reduction_check

__all__ = [
    "AnnulusForms", "AnnulusSample", "BranchSet", "ConvexityReport", "Extrapolation", "GapScan", "ModeReport",
    "SymmetryReport", "VariationReport", "annulus_forms", "boundary_X", "constant_forms_closed", "convexity_report",
    "convexity_slacks", "extrapolate_limit", "fd_derivative", "gap_scan", "greedy_match", "half_rectangle_spectra",
    "hf_derivative", "min_relative_gap", "mixed_rectangle_spectrum", "mode_estimates", "nonconcentration_report",
    "rectangle_spectrum", "sample_annulus", "sample_callable", "spectrum_gaps", "symmetry_reduction_check",
    "track_branches", "variation_audit",
]
