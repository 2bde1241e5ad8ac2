"""Grain-boundary Schroedinger operators on desk-scale grids."""
__version__ = "0.1.0"
