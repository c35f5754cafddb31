"""Certified non-divisibility of the integral point (0, n^3) on
y^2 = x^3 + t x^2 - n^2 (t + 3 n^2) x + n^6."""

__version__ = "0.1.0"

from .curves import CurveParams, WeierstrassCurve, make_curve, minimal_model
from .points import Point

__all__ = ["CurveParams", "WeierstrassCurve", "Point", "make_curve", "minimal_model", "__version__"]
