"""Discrete one-sided BLO/BMO norms, weights and parabolic geometry."""

__version__ = "0.1.0"
