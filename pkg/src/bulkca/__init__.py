"""Bulking toolkit for one-dimensional cellular automata.

Rescaling transforms, local morphisms (sub-automaton, quotient, mixed),
decision procedures for global properties, a zoo of constructions and a
bounded simulation search.
"""
from .core import Automaton, CAError, PeriodicConfig, iterate, step
from .transform import Transform, apply_transform, grouping, normalize_composition

__all__ = [
    "Automaton",
    "CAError",
    "PeriodicConfig",
    "Transform",
    "apply_transform",
    "grouping",
    "iterate",
    "normalize_composition",
    "step",
]
__version__ = "0.1.0"
