"""Replica-parallel execution and seeding."""

__version__ = "0.1.0"
