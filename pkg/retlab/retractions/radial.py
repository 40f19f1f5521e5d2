"""Radial retraction r(f) = f / |f| outside the dual unit ball."""

from __future__ import annotations

import numpy as np

from retlab.core.base import RetractionHandle
from retlab.core.models import RetractionKind, SpaceSpec
from retlab.spaces import DualElement, dual_norm


def radial_retract(space: SpaceSpec, f: DualElement) -> DualElement:
    """Identity on the ball, f / |f| outside; idempotent."""
    size = dual_norm(space, f)
    if size <= 1.0:
        return f
    return DualElement(space, np.asarray(f.coords) / size)


class RadialRetraction(RetractionHandle):
    """Radial projection onto the dual ball.

    It is an exact nearest-point map in every norm (|f - f/|f|| = |f| - 1),
    so its nearest-point function vanishes. No modulus is claimed.
    """

    kind = RetractionKind.RADIAL

    def _retract(self, coords: np.ndarray, size: float) -> np.ndarray:
        return coords / size

    def nearest_point_f(self, d: float) -> float:
        return 0.0
