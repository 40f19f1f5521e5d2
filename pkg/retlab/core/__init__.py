"""Core retraction-lab abstractions: errors, models and structured logging.

The abstract RetractionHandle lives in retlab.core.base and the factory in
retlab.core.factory; both depend on retlab.spaces and are imported from
their modules directly.
"""

from __future__ import annotations

from .errors import (
    BisectionFailureError,
    BumpInvalidError,
    ComponentMismatchError,
    ConfigInvalidError,
    DimensionMismatchError,
    EmptyCurveError,
    EmptyKError,
    IndexOutOfRangeError,
    LabelCollisionError,
    NonSmoothPointError,
    NonUniqueExtensionError,
    NotUniformlyConvexError,
    NotUniformlyMonotoneError,
    PolicyValidationError,
    PreconditionModulusError,
    PremiseViolationError,
    RetractionLabError,
    SearchExhaustedError,
    SolverDivergenceError,
    SpaceSpecError,
    UnsupportedSpaceError,
    ZeroFunctionalError,
)
from .logging import LabLogger, configure_structlog
from .models import (
    C0Sum,
    CurveKind,
    L1Sum,
    LpSpace,
    LpSum,
    ModulusCurve,
    NumericsPolicy,
    RetractionKind,
    SpaceSpec,
    SupSpace,
    parse_space,
)

__all__ = [
    "BisectionFailureError",
    "BumpInvalidError",
    "C0Sum",
    "ComponentMismatchError",
    "ConfigInvalidError",
    "CurveKind",
    "DimensionMismatchError",
    "EmptyCurveError",
    "EmptyKError",
    "IndexOutOfRangeError",
    "L1Sum",
    "LabLogger",
    "LabelCollisionError",
    "LpSpace",
    "LpSum",
    "ModulusCurve",
    "NonSmoothPointError",
    "NonUniqueExtensionError",
    "NotUniformlyConvexError",
    "NotUniformlyMonotoneError",
    "NumericsPolicy",
    "PolicyValidationError",
    "PreconditionModulusError",
    "PremiseViolationError",
    "RetractionKind",
    "RetractionLabError",
    "SearchExhaustedError",
    "SolverDivergenceError",
    "SpaceSpec",
    "SpaceSpecError",
    "SupSpace",
    "UnsupportedSpaceError",
    "ZeroFunctionalError",
    "configure_structlog",
    "parse_space",
]
