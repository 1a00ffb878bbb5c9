"""Explicit-state verification of Prêt à Voter models."""

__version__ = "0.1.0"
