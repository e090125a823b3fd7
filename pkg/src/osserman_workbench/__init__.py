"""Pointwise curvature algebra of Lorentzian globally framed f-structures."""

__version__ = "0.1.0"
