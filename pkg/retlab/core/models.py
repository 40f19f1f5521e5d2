"""Pydantic models for space descriptions, modulus curves and numeric policy.

Provides the declarative SpaceSpec family (lp / sup leaves and l1 / c0 / lp
sums), the tabulated ModulusCurve, the NumericsPolicy holding every tolerance
and sample count, and the enums naming retraction and curve kinds. All models
are validated at construction time; validation failures surface as the
domain errors from retlab.core.errors.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Annotated, Any, ClassVar, Literal

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    TypeAdapter,
    ValidationError,
    field_validator,
    model_validator,
)

from retlab.core.errors import EmptyCurveError, PolicyValidationError, SpaceSpecError


class RetractionKind(str, Enum):
    """Retraction families that can be built by the factory.

    RADIAL: f / |f| outside the ball
    TRUNCATION: crossing-index truncation on a 1-unconditional basis
    L1SUM: componentwise retraction on the dual of an l1-sum
    C0CHAIN: subspace-chain retraction on the dual of a c0-sum
    TRANSFERRED: one-point compactification transfer
    COMPONENT: retraction induced on one component of a sum
    """

    RADIAL = "radial"
    TRUNCATION = "truncation"
    L1SUM = "l1sum"
    C0CHAIN = "c0chain"
    TRANSFERRED = "transferred"
    COMPONENT = "component"


class CurveKind(str, Enum):
    """What a tabulated ModulusCurve measures."""

    MONOTONICITY = "monotonicity"
    CONVEXITY = "convexity"
    INVERSE = "inverse"
    OMEGA = "omega"
    BOUND = "bound"


class _SpaceBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise SpaceSpecError(f"Invalid space spec: {e}") from e

    @property
    def total_dim(self) -> int:
        raise NotImplementedError

    @property
    def is_leaf(self) -> bool:
        return False


class LpSpace(_SpaceBase):
    """Finite-dimensional l_p^n with 1 <= p < inf."""

    kind: Literal["lp"] = "lp"
    p: float = Field(ge=1.0, description="Exponent of the norm; p = inf is SupSpace")
    dim: int = Field(ge=1, description="Number of coordinates")

    @field_validator("p")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        """Reject p = inf; the sup norm is its own leaf kind."""
        if not math.isfinite(v):
            raise ValueError("p must be finite; use kind 'sup' for the sup norm")
        return v

    @property
    def total_dim(self) -> int:
        return self.dim

    @property
    def is_leaf(self) -> bool:
        return True


class SupSpace(_SpaceBase):
    """Finite-dimensional sup-norm space (c_0^n, or C(K) for |K| = n)."""

    kind: Literal["sup"] = "sup"
    dim: int = Field(ge=1)

    @property
    def total_dim(self) -> int:
        return self.dim

    @property
    def is_leaf(self) -> bool:
        return True


class _SumBase(_SpaceBase):
    components: tuple[SpaceSpec, ...] = Field(min_length=1)

    @property
    def total_dim(self) -> int:
        return sum(c.total_dim for c in self.components)


class L1Sum(_SumBase):
    """l1-sum of component spaces: |x| = sum of component norms."""

    kind: Literal["l1sum"] = "l1sum"


class C0Sum(_SumBase):
    """c0-sum of component spaces: |x| = max of component norms."""

    kind: Literal["c0sum"] = "c0sum"


class LpSum(_SumBase):
    """lp-sum of component spaces for 1 < p < inf."""

    kind: Literal["lpsum"] = "lpsum"
    p: float = Field(gt=1.0)

    @field_validator("p")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("lpsum exponent must be finite; use kind 'c0sum'")
        return v


SpaceSpec = Annotated[
    LpSpace | SupSpace | L1Sum | C0Sum | LpSum,
    Field(discriminator="kind"),
]

for _model in (L1Sum, C0Sum, LpSum):
    _model.model_rebuild()

_SPACE_ADAPTER: TypeAdapter[Any] = TypeAdapter(SpaceSpec)


def parse_space(document: Any) -> LpSpace | SupSpace | L1Sum | C0Sum | LpSum:
    """Build a SpaceSpec from its JSON document (dict or JSON string).

    Raises:
        SpaceSpecError: If the document does not describe a valid space
    """
    try:
        if isinstance(document, str | bytes):
            return _SPACE_ADAPTER.validate_json(document)  # type: ignore[no-any-return]
        return _SPACE_ADAPTER.validate_python(document)  # type: ignore[no-any-return]
    except SpaceSpecError:
        raise
    except ValidationError as e:
        raise SpaceSpecError(f"Invalid space spec: {e}") from e


class ModulusCurve(BaseModel):
    """Tabulated t -> value data for M, delta, M^-1, omega-hat or a claimed bound.

    Evaluation between grid points is linear; outside the grid the curve is
    clamped to its first / last value.

    Attributes:
        kind: Which quantity the curve tabulates
        grid: Strictly increasing non-negative abscissae
        values: One value per grid point
    """

    model_config = ConfigDict(frozen=True)

    _NON_DECREASING: ClassVar[frozenset[CurveKind]] = frozenset(
        {CurveKind.MONOTONICITY, CurveKind.CONVEXITY, CurveKind.INVERSE}
    )

    kind: CurveKind
    grid: tuple[float, ...]
    values: tuple[float, ...]

    @model_validator(mode="after")
    def validate_shape(self) -> ModulusCurve:
        """Check lengths, grid ordering and monotonicity of moduli."""
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values must have the same length")
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.size and (grid[0] < 0 or np.any(np.diff(grid) <= 0)):
            raise ValueError("grid must be non-negative and strictly increasing")
        if self.kind in self._NON_DECREASING and np.any(np.diff(values) < -1e-12):
            raise ValueError(f"{self.kind.value} curve must be non-decreasing")
        if self.kind is CurveKind.MONOTONICITY and np.any(values > grid + 1e-9):
            raise ValueError("a modulus of monotonicity never exceeds epsilon")
        return self

    @property
    def grid_array(self) -> np.ndarray:
        return np.asarray(self.grid, dtype=float)

    @property
    def values_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.grid)

    def evaluate(self, t: float | np.ndarray) -> float | np.ndarray:
        """Evaluate by linear interpolation with clamped extrapolation."""
        if not self.grid:
            raise EmptyCurveError(f"{self.kind.value} curve has no points")
        result = np.interp(t, self.grid_array, self.values_array)
        return float(result) if np.ndim(result) == 0 else result

    @classmethod
    def from_function(
        cls, kind: CurveKind, grid: Any, func: Any
    ) -> ModulusCurve:
        """Tabulate a scalar function on a grid."""
        grid_arr = np.asarray(grid, dtype=float)
        values = [float(func(float(t))) for t in grid_arr]
        return cls(kind=kind, grid=tuple(grid_arr.tolist()), values=tuple(values))

    @classmethod
    def pointwise_max(cls, curves: list[ModulusCurve], kind: CurveKind = CurveKind.BOUND) -> ModulusCurve:
        """Pointwise maximum of several curves, tabulated on the first curve's grid."""
        if not curves:
            raise EmptyCurveError("pointwise_max needs at least one curve")
        grid = curves[0].grid_array
        stacked = np.vstack([np.asarray(c.evaluate(grid), dtype=float) for c in curves])
        return cls(kind=kind, grid=tuple(grid.tolist()), values=tuple(stacked.max(axis=0).tolist()))


class NumericsPolicy(BaseModel):
    """Type-safe tolerances and sample counts for every numeric routine.

    Attributes:
        equality_tol: Tolerance for equality certificates (norms, pairings)
        sampled_tol: Tolerance for sampled inf/sup estimates
        bisection_xtol: Absolute tolerance of every bisection root
        bisection_maxiter: Iteration cap for bisection
        grid_points: Coarse samples per dimension for numeric moduli
        refine_iterations: Number of coarse candidates polished by local search
        extension_maxiter: Iteration cap of the iterative extension solver
        extension_tol: Function-value tolerance of the iterative extension solver
        bpb_path_points: Grid size of the BPB path search
        omega_radius_low: Lower radius of near-sphere samples for omega-hat
        omega_radius_high: Upper radius of near-sphere samples for omega-hat
        ball_diameter: Diameter of the unit ball, the trivial modulus bound
        modulus_grid: Grid on which handles tabulate their claimed moduli
    """

    equality_tol: float = Field(default=1e-9, gt=0)
    sampled_tol: float = Field(default=1e-3, gt=0)
    bisection_xtol: float = Field(default=1e-12, gt=0)
    bisection_maxiter: int = Field(default=200, gt=0)
    grid_points: int = Field(default=64, gt=0)
    refine_iterations: int = Field(default=20, ge=0)
    extension_maxiter: int = Field(default=10_000, gt=0)
    extension_tol: float = Field(default=1e-10, gt=0)
    bpb_path_points: int = Field(default=64, ge=2)
    omega_radius_low: float = Field(default=0.9, gt=0)
    omega_radius_high: float = Field(default=1.5, gt=0)
    ball_diameter: float = Field(default=2.0, gt=0)
    modulus_grid: tuple[float, ...] = Field(
        default_factory=lambda: tuple(np.round(np.linspace(0.01, 1.0, 100), 10).tolist())
    )

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise PolicyValidationError(f"Invalid numerics policy: {e}") from e

    @classmethod
    def model_validate(  # type: ignore[override]
        cls,
        obj: Any,
        *,
        strict: bool | None = None,
        from_attributes: bool | None = None,
        context: Any | None = None,
    ) -> NumericsPolicy:
        try:
            return super().model_validate(
                obj, strict=strict, from_attributes=from_attributes, context=context
            )
        except ValidationError as e:
            raise PolicyValidationError(f"Invalid numerics policy: {e}") from e

    @model_validator(mode="after")
    def validate_radii(self) -> NumericsPolicy:
        """Near-sphere sampling needs a non-empty radius band."""
        if self.omega_radius_low >= self.omega_radius_high:
            raise ValueError("omega_radius_low must be below omega_radius_high")
        grid = np.asarray(self.modulus_grid, dtype=float)
        if grid.size == 0 or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("modulus_grid must be positive and strictly increasing")
        return self
