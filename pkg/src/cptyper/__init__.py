"""Combinatorial curvature and circle-packing type of planar triangulations."""

__version__ = "0.1.0"
