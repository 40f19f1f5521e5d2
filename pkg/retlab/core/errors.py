"""Exception classes for retraction-lab failures and validation errors.

Every error raised by the library derives from RetractionLabError so callers
can catch the whole family at once. Pydantic ValidationError is never leaked
to callers: model constructors re-raise it as one of the *ValidationError
classes below.
"""

from __future__ import annotations


class RetractionLabError(Exception):
    """Base class for all retraction-lab errors."""


class SpaceSpecError(RetractionLabError):
    """Raised when a space document fails validation.

    Wraps Pydantic ValidationError for SpaceSpec documents (unknown kind,
    p < 1, empty component list, non-positive dimension).
    """


class PolicyValidationError(RetractionLabError):
    """Raised when the numerics policy or its TOML file holds invalid values."""


class ConfigInvalidError(RetractionLabError):
    """Raised when an experiment configuration cannot be loaded or validated.

    The CLI maps this error to exit code 2.
    """


class DimensionMismatchError(RetractionLabError):
    """Coordinates do not match the total dimension (or space) they are tagged with."""


class IndexOutOfRangeError(RetractionLabError):
    """A truncation index or subspace index lies outside 0..dim."""


class NonSmoothPointError(RetractionLabError):
    """The norming point of a functional is not unique and no tie-break applies."""


class ZeroFunctionalError(RetractionLabError):
    """A norming point was requested for the zero functional."""


class UnsupportedSpaceError(RetractionLabError):
    """The operation is not defined for this kind of space."""


class EmptyCurveError(RetractionLabError):
    """A tabulated modulus curve has no points."""


class NotUniformlyConvexError(RetractionLabError):
    """The space has no positive modulus of convexity (p in {1, inf} leaves, flat sums)."""


class NotUniformlyMonotoneError(RetractionLabError):
    """The dual lattice has a vanishing modulus of monotonicity."""


class BisectionFailureError(RetractionLabError):
    """A root bracket degenerated; signals a norm-evaluation bug."""


class ComponentMismatchError(RetractionLabError):
    """Children of a sum retraction do not match the components of the sum."""


class NonUniqueExtensionError(RetractionLabError):
    """The minimum-norm Hahn-Banach extension is not unique."""


class SolverDivergenceError(RetractionLabError):
    """The iterative extension solver hit its iteration cap without converging."""


class PreconditionModulusError(RetractionLabError):
    """A modulus hypothesis required by a construction does not hold."""


class LabelCollisionError(RetractionLabError):
    """A measure or operator label is duplicated or clashes with the point at infinity."""


class PremiseViolationError(RetractionLabError):
    """The quantitative premise of a perturbation statement does not hold."""


class SearchExhaustedError(RetractionLabError):
    """Every search strategy failed; signals an implementation bug."""


class BumpInvalidError(RetractionLabError):
    """A bump function is not a [0, 1]-valued map equal to 1 at the witness point."""


class EmptyKError(RetractionLabError):
    """An operator into C(K) was given an empty set of points."""
