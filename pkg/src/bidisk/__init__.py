"""Reproducing-kernel tools for composition operators on H^2 of the bidisk."""
from . import _backend
from .bipoly import (BiPoly, NotDivisible, Point2, TrigPoly, backward_shift, compose,
                     divide_exact, embed, evaluate, project, sup_norm_grid)

__all__ = ["BiPoly", "NotDivisible", "Point2", "TrigPoly", "backward_shift", "compose",
           "divide_exact", "embed", "evaluate", "project", "sup_norm_grid", "BACKEND"]

__version__ = "0.1.0"
BACKEND = _backend.NAME
