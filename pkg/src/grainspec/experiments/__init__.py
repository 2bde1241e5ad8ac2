"""Numerical experiments: band gaps, dislocation flow, rotation gap filling,
count scaling, localization and barrier decoupling."""
from .bands import SpectralGap, band_table, find_gap, momentum_grid
from .decoupling import (DecouplingError, barrier_grid_masks, check_masks, decoupling_check,
                         decoupling_norm)
from .flow import (ApproximateEigenfunction, ConstructionError, FlowError, FlowRecord,
                   build_approximate_eigenfunction, crossing_eigenvalue, cutoff,
                   dislocation_flow, plane_dislocation_box, stretched_operator)
from .localization import LocalizationProfile, localization_profile, mass_beyond
from .rotation import (CountScalingReport, FillReport, FillRow, ScalingRow, count_scaling,
                       interface_pairs, rotation_box, rotation_gap_fill, translated_residual)

__all__ = [
    "ApproximateEigenfunction", "ConstructionError", "CountScalingReport", "DecouplingError",
    "FillReport", "FillRow", "FlowError", "FlowRecord", "LocalizationProfile", "ScalingRow",
    "SpectralGap", "band_table", "barrier_grid_masks", "build_approximate_eigenfunction",
    "check_masks", "count_scaling", "crossing_eigenvalue", "cutoff", "decoupling_check",
    "decoupling_norm", "dislocation_flow", "find_gap", "interface_pairs",
    "localization_profile", "mass_beyond", "momentum_grid", "plane_dislocation_box",
    "rotation_box", "rotation_gap_fill", "stretched_operator", "translated_residual",
]
