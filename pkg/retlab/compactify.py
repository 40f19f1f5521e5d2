"""One-point compactification transfer of retractions for finite discrete L.

M(L) = C_0(L)* is l_1(L) and C(K) for K = L u {inf} is the sup space on
|L| + 1 points, so a retraction on the dual of C(K) is a handle on
SupSpace(|L| + 1) whose last coordinate is the point at infinity. A measure
mu on L is extended by zero mass at infinity, retracted, and restricted back
to L.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from retlab.core.base import RetractionHandle
from retlab.core.errors import DimensionMismatchError, LabelCollisionError
from retlab.core.logging import LabLogger
from retlab.core.models import NumericsPolicy, RetractionKind, SupSpace
from retlab.spaces import DualElement

INFINITY_LABEL = "∞"


class FiniteMeasure(BaseModel):
    """Signed point masses on a finite set of labels.

    Attributes:
        labels: Point labels, unique
        masses: One signed mass per label
    """

    model_config = ConfigDict(frozen=True)

    labels: tuple[str, ...]
    masses: tuple[float, ...]

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            if "duplicate label" in str(e):
                raise LabelCollisionError(f"Invalid measure: {e}") from e
            raise DimensionMismatchError(f"Invalid measure: {e}") from e

    @model_validator(mode="after")
    def validate_labels(self) -> FiniteMeasure:
        if len(self.labels) != len(self.masses):
            raise ValueError("labels and masses must have the same length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate label in measure")
        return self

    @property
    def mass_array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    @property
    def norm(self) -> float:
        """Total variation, the sum of absolute masses."""
        return float(np.sum(np.abs(self.mass_array)))

    def to_mapping(self) -> dict[str, float]:
        return dict(zip(self.labels, self.masses, strict=True))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float]) -> FiniteMeasure:
        return cls(labels=tuple(str(k) for k in mapping), masses=tuple(float(v) for v in mapping.values()))

    @classmethod
    def from_array(cls, labels: tuple[str, ...] | list[str], masses: np.ndarray) -> FiniteMeasure:
        return cls(labels=tuple(labels), masses=tuple(np.asarray(masses, dtype=float).tolist()))


def measure_space(mu: FiniteMeasure) -> SupSpace:
    """The primal C_0(L) whose dual holds ``mu``."""
    return SupSpace(dim=len(mu.labels))


def extend_measure(mu: FiniteMeasure) -> FiniteMeasure:
    """mu~(E) = mu(E minus {inf}): same masses on L, zero at the point at infinity."""
    if INFINITY_LABEL in mu.labels:
        raise LabelCollisionError(f"label {INFINITY_LABEL!r} is reserved for the point at infinity")
    return FiniteMeasure(labels=mu.labels + (INFINITY_LABEL,), masses=mu.masses + (0.0,))


def transfer_retract(handle: RetractionHandle, mu: FiniteMeasure) -> FiniteMeasure:
    """psi(mu) = phi_K(mu~) restricted to L.

    Raises:
        DimensionMismatchError: If ``handle`` does not retract the dual of C(K), |K| = |L| + 1
    """
    extended = extend_measure(mu)
    if handle.space != SupSpace(dim=len(extended.labels)):
        raise DimensionMismatchError(
            f"handle on {handle.space!r} cannot retract measures on {len(extended.labels)} points"
        )
    image = handle.apply(DualElement(handle.space, extended.mass_array))
    return FiniteMeasure.from_array(mu.labels, image.coords[:-1])


class TransferredRetraction(RetractionHandle):
    """psi on M(L) = C_0(L)* induced by a retraction ``child`` on C(K)*."""

    kind = RetractionKind.TRANSFERRED

    def __init__(
        self,
        child: RetractionHandle,
        labels: tuple[str, ...] | list[str] | None = None,
        policy: NumericsPolicy | None = None,
        logger: LabLogger | None = None,
    ) -> None:
        if not isinstance(child.space, SupSpace) or child.space.dim < 2:
            raise DimensionMismatchError(
                f"transfer needs a handle on C(K)* with |K| >= 2, got {child.space!r}"
            )
        n = child.space.dim - 1
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(1, n + 1))
        if len(labels) != n:
            raise DimensionMismatchError(f"{len(labels)} labels for {n} points of L")
        if INFINITY_LABEL in labels:
            raise LabelCollisionError(f"label {INFINITY_LABEL!r} is reserved for the point at infinity")
        super().__init__(SupSpace(dim=n), policy or child.policy, logger or child.logger)
        self.child = child
        self.labels = labels

    def _retract(self, coords: np.ndarray, size: float) -> np.ndarray:
        mu = FiniteMeasure.from_array(self.labels, coords)
        return transfer_retract(self.child, mu).mass_array

    def modulus_bound(self, t: float) -> float | None:
        return self.child.modulus_bound(t)

    def nearest_point_f(self, d: float) -> float | None:
        return self.child.nearest_point_f(d)

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["child"] = self.child.to_dict()
        data["labels"] = list(self.labels)
        return data
