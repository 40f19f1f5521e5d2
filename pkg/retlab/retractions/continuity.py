"""Sampled modulus of continuity and nearest-point defect of a retraction."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from retlab.core.base import RetractionHandle
from retlab.core.errors import DimensionMismatchError
from retlab.core.models import CurveKind, ModulusCurve, NumericsPolicy, SpaceSpec
from retlab.spaces import DualElement, dual_norm, dual_norm_array, random_directions

# Pair families, in the order their samples are drawn
SAMPLE_FAMILIES = ("uniform", "near_sphere", "straddle")


def _base_points(
    handle: RetractionHandle,
    family: str,
    t: float,
    count: int,
    rng: np.random.Generator,
    policy: NumericsPolicy,
) -> np.ndarray:
    directions = random_directions(handle.space, rng, count, dual=True)
    match family:
        case "uniform":
            radii = rng.uniform(0.0, policy.ball_diameter, count)
        case "near_sphere":
            radii = rng.uniform(policy.omega_radius_low, policy.omega_radius_high, count)
        case "straddle":
            radii = rng.uniform(max(1.0 - t, 0.0), 1.0, count)
        case _:
            raise ValueError(f"Unknown sample family: {family}")
    return directions * radii[:, None]


def omega_estimate(
    handle: RetractionHandle,
    t_grid: ArrayLike,
    seed: int = 0,
    samples: int = 1000,
    policy: NumericsPolicy | None = None,
) -> ModulusCurve:
    """Empirical omega_phi(t) = sup |phi(x) - phi(y)| over sampled |x - y| <= t.

    Pairs are (g, g + t u) with u a random dual-unit direction and g drawn
    from three families: radius uniform in [0, 2], radius in the near-sphere
    band, and radius in [1 - t, 1] so that y may leave the ball. ``samples``
    pairs are split over the families for every t. The running max over the
    grid is returned, so the curve is a lower bound for the true modulus.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    policy = policy or handle.policy
    grid = np.asarray(t_grid, dtype=float)
    rng = np.random.default_rng(seed)
    per_family = np.array_split(np.arange(samples), len(SAMPLE_FAMILIES))

    values = np.zeros(grid.size)
    for k, t in enumerate(grid):
        if t == 0.0:
            continue
        best = 0.0
        for family, chunk in zip(SAMPLE_FAMILIES, per_family, strict=True):
            if chunk.size == 0:
                continue
            xs = _base_points(handle, family, float(t), chunk.size, rng, policy)
            ys = xs + t * random_directions(handle.space, rng, chunk.size, dual=True)
            images = np.array(
                [handle.apply_coords(x) - handle.apply_coords(y) for x, y in zip(xs, ys, strict=True)]
            )
            best = max(best, float(np.max(dual_norm_array(handle.space, images))))
        values[k] = best

    values = np.maximum.accumulate(values)
    return ModulusCurve(kind=CurveKind.OMEGA, grid=tuple(grid.tolist()), values=tuple(values.tolist()))


def nearest_point_defect(space: SpaceSpec, f: DualElement, handle: RetractionHandle) -> float:
    """|f - phi(f)| - dist(f, ball): how far phi(f) is from a nearest point."""
    if handle.space != space or f.space != space:
        raise DimensionMismatchError(f"handle and functional must both live on {space!r}")
    size = dual_norm(space, f)
    moved = dual_norm(space, np.asarray(f.coords) - handle.apply(f).coords)
    return moved - max(size - 1.0, 0.0)
