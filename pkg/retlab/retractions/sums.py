"""Retractions assembled from, or restricted to, the components of a sum.

L1SumRetraction: X = [+ X_j]_l1 has dual [+ X_j*]_sup, and retracting each
block with its own retraction lands in the sup-sum ball. The family must be
uniformly continuous uniformly in j; that hypothesis is recorded as the sup
of the children's claimed moduli and checked when the handle is built.

ComponentRetraction: the converse direction. A retraction on the dual of an
l1-, c0- or lp-sum induces one on each component dual (embed the block by
zero, retract, read the block back).
"""

from __future__ import annotations

from typing import Any

import numpy as np

from retlab.core.base import RetractionHandle
from retlab.core.errors import (
    ComponentMismatchError,
    PreconditionModulusError,
    UnsupportedSpaceError,
)
from retlab.core.logging import LabLogger
from retlab.core.models import C0Sum, L1Sum, LpSum, NumericsPolicy, RetractionKind, SpaceSpec
from retlab.spaces import DualElement, component_offsets


class L1SumRetraction(RetractionHandle):
    """Componentwise retraction phi(x*) = (phi_j(x*_j))_j on the dual of an l1-sum.

    Raises:
        ComponentMismatchError: If the children do not match the components
        PreconditionModulusError: If some child claims no modulus or the sup
            of the claimed moduli does not decrease towards 0 on the grid
    """

    kind = RetractionKind.L1SUM

    def __init__(
        self,
        space: SpaceSpec,
        children: list[RetractionHandle],
        policy: NumericsPolicy | None = None,
        logger: LabLogger | None = None,
    ) -> None:
        super().__init__(space, policy, logger)
        if not isinstance(space, L1Sum):
            raise UnsupportedSpaceError(f"l1-sum retraction needs an l1sum space, got {space.kind}")
        if len(children) != len(space.components):
            raise ComponentMismatchError(
                f"{len(children)} children for {len(space.components)} components"
            )
        for i, (child, component) in enumerate(zip(children, space.components, strict=True)):
            if child.space != component:
                raise ComponentMismatchError(
                    f"child {i} retracts the dual of {child.space!r}, component is {component!r}"
                )
        self.children = list(children)
        self.offsets = component_offsets(space)
        self.sup_curve = self._check_uniformity()
        self.logger.log_retraction_built(
            self.kind.value,
            space.model_dump(mode="json"),
            children=[c.kind.value for c in self.children],
        )

    def _check_uniformity(self) -> np.ndarray:
        grid = self.policy.modulus_grid
        curves = []
        for i, child in enumerate(self.children):
            values = [child.modulus_bound(t) for t in grid]
            if any(v is None for v in values):
                raise PreconditionModulusError(
                    f"child {i} ({child.kind.value}) claims no modulus of continuity"
                )
            curves.append(np.asarray(values, dtype=float))
        sup_curve = np.max(np.vstack(curves), axis=0)
        if not np.all(np.isfinite(sup_curve)):
            raise PreconditionModulusError("sup of the children's moduli is infinite on the grid")
        if np.any(np.diff(sup_curve) < -self.policy.equality_tol):
            raise PreconditionModulusError("sup of the children's moduli is not non-decreasing")
        if not sup_curve[0] < min(sup_curve[-1], self.policy.ball_diameter):
            raise PreconditionModulusError(
                "sup of the children's moduli does not decrease towards 0 on the grid"
            )
        return sup_curve

    def _retract(self, coords: np.ndarray, size: float) -> np.ndarray:
        out = np.array(coords)
        for i, child in enumerate(self.children):
            lo, hi = self.offsets[i], self.offsets[i + 1]
            out[lo:hi] = child.apply_coords(coords[lo:hi])
        return out

    def modulus_bound(self, t: float) -> float | None:
        values = [child.modulus_bound(t) for child in self.children]
        return max(v for v in values if v is not None)

    def nearest_point_f(self, d: float) -> float | None:
        values = [child.nearest_point_f(d) for child in self.children]
        if any(v is None for v in values):
            return None
        return max(v for v in values if v is not None)

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["children"] = [child.to_dict() for child in self.children]
        return data


def l1_sum_retract(children: list[RetractionHandle], f: DualElement) -> DualElement:
    """Apply ``children`` blockwise to a functional on an l1-sum."""
    return L1SumRetraction(f.space, children).apply(f)


class ComponentRetraction(RetractionHandle):
    """Retraction on X_i* induced by a retraction on the dual of a sum containing X_i."""

    kind = RetractionKind.COMPONENT

    def __init__(
        self,
        parent: RetractionHandle,
        index: int,
        policy: NumericsPolicy | None = None,
        logger: LabLogger | None = None,
    ) -> None:
        if not isinstance(parent.space, L1Sum | C0Sum | LpSum):
            raise UnsupportedSpaceError(
                f"component retractions need a sum parent, got {parent.space.kind}"
            )
        components = parent.space.components
        if not 0 <= index < len(components):
            raise ComponentMismatchError(f"component {index} outside 0..{len(components) - 1}")
        super().__init__(components[index], policy or parent.policy, logger or parent.logger)
        self.parent = parent
        self.index = index
        offsets = component_offsets(parent.space)
        self._lo, self._hi = offsets[index], offsets[index + 1]

    def _retract(self, coords: np.ndarray, size: float) -> np.ndarray:
        embedded = np.zeros(self.parent.space.total_dim)
        embedded[self._lo : self._hi] = coords
        out = self.parent.apply(DualElement(self.parent.space, embedded))
        return np.array(out.coords[self._lo : self._hi])

    def modulus_bound(self, t: float) -> float | None:
        return self.parent.modulus_bound(t)

    def nearest_point_f(self, d: float) -> float | None:
        return self.parent.nearest_point_f(d)

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["parent"] = self.parent.to_dict()
        data["index"] = self.index
        return data
