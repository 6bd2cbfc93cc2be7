"""Modeling and simulation of ME/US wireless-power receivers."""

__version__ = "0.1.0"
