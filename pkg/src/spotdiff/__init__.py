"""Spot the Difference dialog generator and evaluation harness."""

__version__ = "0.1.0"
