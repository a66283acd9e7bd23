"""Quasi-local masses and geometric inequalities on exact black hole initial data."""

__version__ = "0.1.0"
