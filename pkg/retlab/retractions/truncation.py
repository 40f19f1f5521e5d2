"""Crossing-index truncation retraction on the dual of a 1-unconditional basis.

For |f| > 1 let n be the first index whose partial sum P_n* f has dual norm
>= 1. The retraction keeps the first n - 1 coordinates, scales coordinate n
by the unique t in (0, 1] putting the result on the unit sphere, and zeroes
the rest. Its modulus of continuity is bounded by 2 M^-1 where M is the
modulus of monotonicity of the dual lattice.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect

from retlab.core.base import RetractionHandle
from retlab.core.errors import BisectionFailureError, NotUniformlyMonotoneError
from retlab.core.logging import LabLogger
from retlab.core.models import NumericsPolicy, RetractionKind, SpaceSpec
from retlab.moduli import is_monotonicity_analytic, modulus_monotonicity, monotonicity_inverse
from retlab.spaces import DualElement, dual_norm_array, dual_space


class Crossing(NamedTuple):
    """Where the partial sums of f leave the ball.

    index: number of leading coordinates kept (1-based crossing index n)
    t: scale applied to coordinate n
    """

    index: int
    t: float


def partial_sum_norms(space: SpaceSpec, coords: np.ndarray) -> np.ndarray:
    """Dual norms of P_1* f, ..., P_dim* f."""
    n = coords.size
    prefixes = np.tril(np.ones((n, n))) * coords[None, :]
    return dual_norm_array(space, prefixes)


class TruncationRetraction(RetractionHandle):
    """Truncation retraction on X* for the coordinate basis of ``space``.

    Raises:
        NotUniformlyMonotoneError: If the dual lattice has M(1) = 0
            (sup-type duals such as the dual of l_1 or of an l1-sum)
    """

    kind = RetractionKind.TRUNCATION

    def __init__(
        self,
        space: SpaceSpec,
        policy: NumericsPolicy | None = None,
        logger: LabLogger | None = None,
    ) -> None:
        super().__init__(space, policy, logger)
        self.dual = dual_space(space)
        if modulus_monotonicity(self.dual, 1.0, self.policy) <= 0.0:
            raise NotUniformlyMonotoneError(
                f"dual of {space.kind} space is not uniformly monotone"
            )
        self.certified = is_monotonicity_analytic(self.dual)
        self.logger.log_retraction_built(
            self.kind.value, space.model_dump(mode="json"), certified=self.certified
        )

    def crossing(self, f: DualElement) -> Crossing:
        """Crossing index and scale of f; (dim, 1.0) inside the ball."""
        coords = np.asarray(f.coords, dtype=float)
        norms = partial_sum_norms(self.space, coords)
        if norms[-1] <= 1.0:
            return Crossing(coords.size, 1.0)
        return self._crossing(coords, norms)

    def _crossing(self, coords: np.ndarray, norms: np.ndarray) -> Crossing:
        n = int(np.argmax(norms >= 1.0))
        base = np.array(coords)
        base[n:] = 0.0
        step = np.zeros_like(coords)
        step[n] = coords[n]

        def gap(t: float) -> float:
            return float(dual_norm_array(self.space, base + t * step)) - 1.0

        low, high = gap(0.0), gap(1.0)
        if high == 0.0:
            return Crossing(n + 1, 1.0)
        if not (low < 0.0 < high):
            self.logger.log_bisection_failed("truncation", low, high)
            raise BisectionFailureError(
                f"degenerate bracket at index {n + 1}: gap(0)={low}, gap(1)={high}"
            )
        t = bisect(
            gap,
            0.0,
            1.0,
            xtol=self.policy.bisection_xtol,
            maxiter=self.policy.bisection_maxiter,
        )
        return Crossing(n + 1, float(t))

    def _retract(self, coords: np.ndarray, size: float) -> np.ndarray:
        norms = partial_sum_norms(self.space, coords)
        index, t = self._crossing(coords, norms)
        out = np.array(coords)
        out[index - 1] *= t
        out[index:] = 0.0
        return out

    def monotonicity_inverse(self, t: float) -> float:
        return monotonicity_inverse(self.dual, t, self.policy)

    def modulus_bound(self, t: float) -> float | None:
        """2 M^-1(t); None when M of the dual is only sampled."""
        if not self.certified:
            return None
        return 2.0 * self.monotonicity_inverse(t)

    def nearest_point_f(self, d: float) -> float | None:
        """M^-1(d) - d, from |f - phi(f)| <= M^-1(|f| - 1)."""
        if not self.certified:
            return None
        return self.monotonicity_inverse(d) - d


def truncation_retract(
    space: SpaceSpec, f: DualElement, policy: NumericsPolicy | None = None
) -> DualElement:
    return TruncationRetraction(space, policy).apply(f)
