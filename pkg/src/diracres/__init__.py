"""Exact symbolic checks for Dirac operators perturbed by differential forms."""

__version__ = "0.1.0"
