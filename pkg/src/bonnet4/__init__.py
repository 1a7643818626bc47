"""Invariants and mean-curvature-preserving deformations of surfaces in 4-space."""

__version__ = "0.1.0"
