"""Abstract base class for dual-ball retractions.

Provides RetractionHandle, the contract every retraction family implements:
identity on the dual unit ball, range inside the ball, a claimed modulus of
continuity and an approximate-nearest-point function.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np

from retlab.core.errors import DimensionMismatchError
from retlab.core.logging import LabLogger
from retlab.core.models import CurveKind, ModulusCurve, NumericsPolicy, RetractionKind
from retlab.policies import default_policy
from retlab.spaces import DualElement, dual_norm_array

if TYPE_CHECKING:
    from retlab.core.models import SpaceSpec


class RetractionHandle(ABC):
    """A retraction of X* onto its unit ball, bundled with its certificates.

    Subclasses implement ``_retract`` for inputs strictly outside the ball;
    ``apply`` returns inputs inside the ball unchanged (the same object).

    Attributes:
        space: The primal space X whose dual X* is retracted
        kind: Retraction family
        policy: Numeric tolerances
        logger: LabLogger for construction events
    """

    kind: ClassVar[RetractionKind]

    def __init__(
        self,
        space: SpaceSpec,
        policy: NumericsPolicy | None = None,
        logger: LabLogger | None = None,
    ) -> None:
        self.space = space
        self.policy = policy or default_policy()
        self.logger = logger or LabLogger()
        self._modulus_curve: ModulusCurve | None = None

    def apply(self, f: DualElement) -> DualElement:
        """phi(f): f itself on the ball, the family's retraction outside."""
        if f.space != self.space:
            raise DimensionMismatchError(f"functional on {f.space!r}, handle on {self.space!r}")
        size = float(dual_norm_array(self.space, f.coords))
        if size <= 1.0:
            return f
        return DualElement(self.space, self._retract(np.array(f.coords), size))

    def __call__(self, f: DualElement) -> DualElement:
        return self.apply(f)

    def apply_coords(self, coords: np.ndarray) -> np.ndarray:
        """Array-in, array-out variant of apply used by samplers."""
        return self.apply(DualElement(self.space, coords)).coords

    @abstractmethod
    def _retract(self, coords: np.ndarray, size: float) -> np.ndarray:
        """Retract ``coords`` whose dual norm ``size`` exceeds 1."""

    def modulus_bound(self, t: float) -> float | None:
        """Claimed upper bound for omega_phi(t); None when nothing is claimed."""
        return None

    def nearest_point_f(self, d: float) -> float | None:
        """f with |phi(x*) - x*| <= d + f(d) for d = dist(x*, ball); None if unknown."""
        return None

    @property
    def modulus_f(self) -> ModulusCurve | None:
        """The claimed modulus tabulated on the policy grid."""
        if self._modulus_curve is None and self.modulus_bound(self.policy.modulus_grid[0]) is not None:
            self._modulus_curve = ModulusCurve.from_function(
                CurveKind.BOUND, self.policy.modulus_grid, self.modulus_bound
            )
        return self._modulus_curve

    def to_dict(self) -> dict[str, Any]:
        """JSON document mirroring the SpaceSpec nesting, tagged with the kind."""
        return {"kind": self.kind.value, "space": self.space.model_dump(mode="json")}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(space={self.space!r})"
