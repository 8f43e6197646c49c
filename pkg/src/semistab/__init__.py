"""Finite-horizon numerical evidence for stability of operator semigroups."""
from .backends import (DiscreteMeasure, Flow, KoopmanSemigroup, MatrixGenerator, MatrixSemigroup,
                       MultiplicationSemigroup)
from .core import NumericalError, SemistabError, Signal, TimeGrid, ValidationError, pairing, running_mean
from .diagnostics import ClassifyConfig, StabilityReport, classify
from .resolvent import ResolventProbe

__version__ = "0.1.0"

__all__ = [
    "ClassifyConfig",
    "DiscreteMeasure",
    "Flow",
    "KoopmanSemigroup",
    "MatrixGenerator",
    "MatrixSemigroup",
    "MultiplicationSemigroup",
    "NumericalError",
    "ResolventProbe",
    "SemistabError",
    "Signal",
    "StabilityReport",
    "TimeGrid",
    "ValidationError",
    "classify",
    "pairing",
    "running_mean",
]
