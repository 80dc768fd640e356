"""Photodetection statistics of light scattered by amplifying or absorbing random media."""
from .detection import DetectionConfig, bose_einstein
from .errors import (
    AccuracyWarning,
    DomainError,
    ExcessNoiseError,
    InvariantViolation,
    NumericalConsistencyError,
    StructuralError,
    ThresholdCrossed,
    UndefinedSignal,
)
from .rng import RngSeed
from .scatter import ScatteringMatrix, blocks, deficit_matrix, star_compose

__all__ = [
    "AccuracyWarning",
    "DetectionConfig",
    "DomainError",
    "ExcessNoiseError",
    "InvariantViolation",
    "NumericalConsistencyError",
    "RngSeed",
    "ScatteringMatrix",
    "StructuralError",
    "ThresholdCrossed",
    "UndefinedSignal",
    "blocks",
    "bose_einstein",
    "deficit_matrix",
    "star_compose",
]
