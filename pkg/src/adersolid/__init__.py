"""High-order ADER-DG solver with subcell limiting for a diffuse-interface model."""

__version__ = "0.1.0"
