"""Preference-conditioned generative search for Pareto sets."""

__version__ = "0.1.0"
