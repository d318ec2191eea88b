"""Numerical laboratory for Mellin operators on the half-line with operator-valued symbols."""
from .report import InconclusiveNumerics, Report

__all__ = ["Report", "InconclusiveNumerics", "scales", "opsym", "twisted", "mellin", "kco", "conormal",
           "merosym", "asympt", "suites"]
__version__ = "0.1.0"
