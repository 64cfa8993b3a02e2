"""Bound states, branches, stability and resonant dynamics of trapped NLS systems."""

__version__ = "0.1.0"
