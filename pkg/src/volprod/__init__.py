"""Symmetric convex bodies, their polars and volumes, and numerical checks of
volume-product inequalities."""

from .bodies import (Body, EuclidBall, HPolytope, Interval, L1Sum, LinearImage, LinfSum, VPolytope, Zonotope,
                     ball, catalog, cross_polytope, cube, gauge, member, support)
from .duality import hull, polar
from .errors import CapabilityError, InputError, PreconditionError
from .products import mahler, santalo_check
from .report import CheckReport, McEstimate
from .volume import volume, volume_mc

__version__ = "0.1.0"

__all__ = [
    "Body", "EuclidBall", "Interval", "VPolytope", "HPolytope", "Zonotope", "L1Sum", "LinfSum", "LinearImage",
    "ball", "cube", "cross_polytope", "catalog", "support", "gauge", "member", "polar", "hull", "volume",
    "volume_mc", "mahler", "santalo_check", "CheckReport", "McEstimate", "InputError", "CapabilityError",
    "PreconditionError", "__version__",
]
