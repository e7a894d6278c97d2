"""Polarization-maximizing opinion dynamics: solvers, hull reduction, analysis."""

__version__ = "0.1.0"
