"""Desk-scale quantum computing: simulation, product formulas, phase
estimation and surface-code memory experiments."""

__version__ = "0.1.0"
