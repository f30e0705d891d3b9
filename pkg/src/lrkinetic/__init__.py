"""Kinetic solvers and wave simulation for long-range correlated random media."""

__version__ = "0.1.0"
