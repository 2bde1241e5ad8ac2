"""Muffin-tin grain boundaries: disc and cut-disc spectra, cut-disc enumeration
and convergence of finite barriers to hard walls."""
from .bessel import bessel_zeros, besselj, disc_eigenvalues, disc_spectrum
from .discs import CutDiscError, cut_disc_eigenvalues, cut_disc_operator, cut_disc_window
from .geometry import (CutDisc, MuffinSpec, brute_force_cut_discs, disc_mask,
                       enumerate_cut_discs, grid_line_mask, rational_tangent, y_period)
from .spectrum import (HeightTable, MuffinError, SurfaceSpectrum, finite_height_convergence,
                       muffin_surface_spectrum)

__all__ = [
    "CutDisc", "CutDiscError", "HeightTable", "MuffinError", "MuffinSpec", "SurfaceSpectrum",
    "bessel_zeros", "besselj", "brute_force_cut_discs", "cut_disc_eigenvalues",
    "cut_disc_operator", "cut_disc_window", "disc_eigenvalues", "disc_mask", "disc_spectrum",
    "enumerate_cut_discs", "finite_height_convergence", "grid_line_mask",
    "muffin_surface_spectrum", "rational_tangent", "y_period",
]
