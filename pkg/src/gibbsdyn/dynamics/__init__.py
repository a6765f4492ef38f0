"""Continuous-time and integrator engines for the three dynamics."""

__version__ = "0.1.0"
