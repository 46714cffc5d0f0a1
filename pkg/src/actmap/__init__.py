"""Analysis toolkit for the Arneodo-Coullet-Tresser map family."""

from .core import Box3, MapParams, OrbitResult, char_poly, evaluate, inverse, iterate, jacobian, nonwandering_box
from .schur import MonicCubic, StableInterval, alpha_hat, bifurcation_values, cubic_roots, is_stable, stable_interval

__version__ = "0.1.0"

__all__ = [
    "Box3",
    "MapParams",
    "MonicCubic",
    "OrbitResult",
    "StableInterval",
    "alpha_hat",
    "bifurcation_values",
    "char_poly",
    "cubic_roots",
    "evaluate",
    "inverse",
    "is_stable",
    "iterate",
    "jacobian",
    "nonwandering_box",
    "stable_interval",
]
