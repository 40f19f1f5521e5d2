"""Moduli of monotonicity and convexity, their inverses, and grid oracles.

Closed forms are used wherever they exist (l_p leaves, sup leaves, l1 and
c0 sums built from them). lp-sums fall back to a two-stage numeric scheme:
a seeded coarse sample of ``grid_points`` directions per dimension, then a
Nelder-Mead polish whose budget scales with ``refine_iterations``. Sampled
values over-estimate an infimum, so numeric moduli are upper estimates.

The grid oracles are brute-force searches used to cross-check closed forms.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize

from retlab.core.errors import (
    EmptyCurveError,
    NotUniformlyConvexError,
    UnsupportedSpaceError,
)
from retlab.core.logging import LabLogger
from retlab.core.models import (
    C0Sum,
    CurveKind,
    L1Sum,
    LpSpace,
    LpSum,
    ModulusCurve,
    NumericsPolicy,
    SpaceSpec,
    SupSpace,
)
from retlab.policies import default_policy
from retlab.spaces import norm_array

_logger = LabLogger("retlab.moduli")


def _check_monotonicity_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")


def _check_convexity_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < 2.0:
        raise ValueError(f"epsilon must lie in (0, 2), got {epsilon}")


def is_monotonicity_analytic(space: SpaceSpec) -> bool:
    """True when modulus_monotonicity has a closed form for ``space``."""
    match space:
        case LpSpace() | SupSpace():
            return True
        case L1Sum(components=components) | C0Sum(components=components):
            return all(is_monotonicity_analytic(c) for c in components)
        case LpSum(components=components):
            return len(components) == 1 and is_monotonicity_analytic(components[0])
    return False


def modulus_monotonicity(
    space: SpaceSpec,
    epsilon: float,
    policy: NumericsPolicy | None = None,
    *,
    seed: int = 0,
) -> float:
    """M(eps) = inf{ | |x| + |y| | - 1 : |x| = 1, |y| >= eps } of a coordinate lattice.

    Closed forms: l_p gives (1 + eps^p)^(1/p) - 1, sup gives 0, an l1-sum
    gives the minimum over its components, a c0-sum of two or more
    components gives 0 (disjoint blocks do not add up in a max norm).

    Args:
        space: The lattice being measured (usually a dual space)
        epsilon: Size of the disjoint piece, in (0, 1]
        policy: Numeric policy for the lp-sum sampling path
        seed: Seed of the sampling path

    Raises:
        ValueError: If epsilon is outside (0, 1]
        UnsupportedSpaceError: If the space spec carries no coordinate lattice
    """
    _check_monotonicity_epsilon(epsilon)
    match space:
        case LpSpace(p=p):
            if p == 1.0:
                return float(epsilon)
            return float(min((1.0 + epsilon**p) ** (1.0 / p) - 1.0, epsilon))
        case SupSpace():
            return 0.0
        case L1Sum(components=components):
            return min(modulus_monotonicity(c, epsilon, policy, seed=seed) for c in components)
        case C0Sum(components=components):
            if len(components) == 1:
                return modulus_monotonicity(components[0], epsilon, policy, seed=seed)
            return 0.0
        case LpSum(components=components):
            if len(components) == 1:
                return modulus_monotonicity(components[0], epsilon, policy, seed=seed)
            return _numeric_monotonicity(space, epsilon, policy or default_policy(), seed)
    raise UnsupportedSpaceError(f"{space!r} has no coordinate lattice")


def _numeric_monotonicity(
    space: SpaceSpec, epsilon: float, policy: NumericsPolicy, seed: int
) -> float:
    n = space.total_dim
    rng = np.random.default_rng(seed)
    raw = np.vstack([np.eye(n), np.abs(rng.standard_normal((policy.grid_points * n, n)))])
    dirs = raw / norm_array(space, raw)[:, None]

    best, best_pair = math.inf, (0, 0)
    for i, x in enumerate(dirs):
        values = norm_array(space, x[None, :] + epsilon * dirs) - 1.0
        j = int(np.argmin(values))
        if values[j] < best:
            best, best_pair = float(values[j]), (i, j)

    def objective(z: np.ndarray) -> float:
        a, b = np.abs(z[:n]), np.abs(z[n:])
        na, nb = float(norm_array(space, a)), float(norm_array(space, b))
        if na == 0.0 or nb == 0.0:
            return math.inf
        return float(norm_array(space, a / na + epsilon * b / nb)) - 1.0

    if policy.refine_iterations:
        start = np.concatenate([dirs[best_pair[0]], dirs[best_pair[1]]])
        res = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"maxiter": policy.refine_iterations * 2 * n * 10, "xatol": 1e-10, "fatol": 1e-13},
        )
        if np.isfinite(res.fun):
            best = min(best, float(res.fun))

    value = float(np.clip(best, 0.0, epsilon))
    _logger.log_numeric_modulus("monotonicity", epsilon, value, dirs.shape[0] ** 2)
    return value


def monotonicity_inverse(
    space: SpaceSpec, t: float, policy: NumericsPolicy | None = None
) -> float:
    """M^-1(t) = sup{eps >= 0 : M(eps) <= t}.

    Closed forms mirror modulus_monotonicity; a vanishing modulus gives
    +inf. lp-sums invert their tabulated numeric curve, clamped to the grid.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    match space:
        case LpSpace(p=p):
            if p == 1.0:
                return float(t)
            return float(((1.0 + t) ** p - 1.0) ** (1.0 / p))
        case SupSpace():
            return math.inf
        case L1Sum(components=components):
            return max(monotonicity_inverse(c, t, policy) for c in components)
        case C0Sum(components=components):
            if len(components) == 1:
                return monotonicity_inverse(components[0], t, policy)
            return math.inf
        case LpSum(components=components):
            if len(components) == 1:
                return monotonicity_inverse(components[0], t, policy)
            policy = policy or default_policy()
            curve = _tabulated_monotonicity(
                space, policy.modulus_grid, policy.grid_points, policy.refine_iterations
            )
            return modulus_inverse(curve, t)
    raise UnsupportedSpaceError(f"{space!r} has no coordinate lattice")


@lru_cache(maxsize=32)
def _tabulated_monotonicity(
    space: SpaceSpec, grid: tuple[float, ...], grid_points: int, refine_iterations: int
) -> ModulusCurve:
    policy = NumericsPolicy(grid_points=grid_points, refine_iterations=refine_iterations)
    return monotonicity_curve(space, grid, policy)


def monotonicity_curve(
    space: SpaceSpec,
    grid: tuple[float, ...] | list[float] | np.ndarray,
    policy: NumericsPolicy | None = None,
    *,
    seed: int = 0,
) -> ModulusCurve:
    """Tabulate M on ``grid``.

    Sampled values are made non-decreasing with a reverse running minimum,
    which stays an upper estimate because M itself is non-decreasing.
    """
    eps = np.asarray(grid, dtype=float)
    values = np.array([modulus_monotonicity(space, float(e), policy, seed=seed) for e in eps])
    values = np.minimum.accumulate(values[::-1])[::-1]
    return ModulusCurve(
        kind=CurveKind.MONOTONICITY, grid=tuple(eps.tolist()), values=tuple(values.tolist())
    )


def modulus_inverse(curve: ModulusCurve, t: float) -> float:
    """Generalized inverse sup{eps : M(eps) <= t} of a tabulated curve.

    Binary search over the tabulated values, then linear interpolation inside
    the bracketing segment. The curve is anchored at M(0) = 0; values of t at
    or above the last tabulated value return the right end of the grid.

    Raises:
        EmptyCurveError: If the curve has no points
    """
    if len(curve) == 0:
        raise EmptyCurveError(f"{curve.kind.value} curve has no points")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    grid = curve.grid_array
    values = curve.values_array
    if grid[0] > 0.0:
        grid = np.concatenate([[0.0], grid])
        values = np.concatenate([[0.0], values])
    if t >= values[-1]:
        return float(grid[-1])
    hi = int(np.searchsorted(values, t, side="right"))
    lo = hi - 1
    return float(grid[lo] + (t - values[lo]) * (grid[hi] - grid[lo]) / (values[hi] - values[lo]))


def modulus_convexity(
    space: SpaceSpec,
    epsilon: float,
    policy: NumericsPolicy | None = None,
    *,
    seed: int = 0,
) -> float:
    """delta(eps) = inf{ 1 - |(x + y)/2| : |x| = |y| = 1, |x - y| >= eps }.

    l_p with p >= 2: 1 - (1 - (eps/2)^p)^(1/p). l_p with 1 < p < 2: the root
    delta of (1 - delta + eps/2)^p + |1 - delta - eps/2|^p = 2. lp-sums of
    uniformly convex components are sampled numerically.

    Raises:
        NotUniformlyConvexError: For p in {1, inf} leaves and for l1 / c0 sums
            of two or more components (they contain flat segments)
    """
    _check_convexity_epsilon(epsilon)
    match space:
        case LpSpace(p=p):
            if p == 1.0:
                raise NotUniformlyConvexError("l_1 is not uniformly convex")
            if p >= 2.0:
                return float(1.0 - (1.0 - (epsilon / 2.0) ** p) ** (1.0 / p))
            return _hanner_delta(p, epsilon)
        case SupSpace():
            raise NotUniformlyConvexError("the sup norm is not uniformly convex")
        case L1Sum(components=components) | C0Sum(components=components):
            if len(components) == 1:
                return modulus_convexity(components[0], epsilon, policy, seed=seed)
            raise NotUniformlyConvexError(f"{space.kind} of several components has flat faces")
        case LpSum(components=components):
            for c in components:
                modulus_convexity(c, epsilon, policy, seed=seed)
            if len(components) == 1:
                return modulus_convexity(components[0], epsilon, policy, seed=seed)
            return _numeric_convexity(space, epsilon, policy or default_policy(), seed)
    raise UnsupportedSpaceError(f"No modulus of convexity for {space!r}")


def _hanner_delta(p: float, epsilon: float) -> float:
    half = epsilon / 2.0

    def equation(delta: float) -> float:
        return (1.0 - delta + half) ** p + abs(1.0 - delta - half) ** p - 2.0

    return float(brentq(equation, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def common_convexity_floor(
    space: SpaceSpec, epsilon: float, policy: NumericsPolicy | None = None
) -> float:
    """inf_i delta_i(eps) over the components of a sum (the leaf itself for a leaf)."""
    components = space.components if not space.is_leaf else (space,)  # type: ignore[union-attr]
    return min(modulus_convexity(c, epsilon, policy) for c in components)


def convexity_curve(
    space: SpaceSpec,
    grid: tuple[float, ...] | list[float] | np.ndarray,
    policy: NumericsPolicy | None = None,
    *,
    seed: int = 0,
) -> ModulusCurve:
    """Tabulate delta on ``grid``."""
    eps = np.asarray(grid, dtype=float)
    values = np.array([modulus_convexity(space, float(e), policy, seed=seed) for e in eps])
    values = np.minimum.accumulate(values[::-1])[::-1]
    return ModulusCurve(
        kind=CurveKind.CONVEXITY, grid=tuple(eps.tolist()), values=tuple(values.tolist())
    )


def _arc_points(
    space: SpaceSpec, x: np.ndarray, z: np.ndarray, epsilon: float, iterations: int = 64
) -> np.ndarray:
    """Points y on the normalized chord from x towards z with |x - y| = eps (row-wise)."""
    lo = np.zeros(x.shape[0])
    hi = np.ones(x.shape[0])

    def along(s: np.ndarray) -> np.ndarray:
        w = (1.0 - s)[:, None] * x + s[:, None] * z
        return w / norm_array(space, w)[:, None]

    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        short = norm_array(space, x - along(mid)) < epsilon
        lo = np.where(short, mid, lo)
        hi = np.where(short, hi, mid)
    return along(hi)


def _convexity_search(
    space: SpaceSpec,
    epsilon: float,
    x_dirs: np.ndarray,
    z_dirs: np.ndarray,
    maxiter: int,
) -> float:
    best, best_pair = math.inf, (x_dirs[0], z_dirs[0])
    for x in x_dirs:
        far = norm_array(space, x[None, :] - z_dirs) >= epsilon
        not_antipodal = norm_array(space, x[None, :] + z_dirs) > 1e-6
        candidates = z_dirs[far & not_antipodal]
        if candidates.size == 0:
            continue
        xs = np.broadcast_to(x, candidates.shape)
        ys = _arc_points(space, xs, candidates, epsilon)
        values = 1.0 - norm_array(space, 0.5 * (xs + ys))
        j = int(np.argmin(values))
        if values[j] < best:
            best, best_pair = float(values[j]), (x, candidates[j])

    n = space.total_dim

    def objective(w: np.ndarray) -> float:
        a, b = w[:n], w[n:]
        na, nb = float(norm_array(space, a)), float(norm_array(space, b))
        if na == 0.0 or nb == 0.0:
            return math.inf
        x, z = a / na, b / nb
        gap = float(norm_array(space, x - z))
        if gap < epsilon or float(norm_array(space, x + z)) <= 1e-6:
            return 1.0 + (epsilon - gap)
        y = _arc_points(space, x[None, :], z[None, :], epsilon)[0]
        return 1.0 - float(norm_array(space, 0.5 * (x + y)))

    if maxiter > 0 and math.isfinite(best):
        res = minimize(
            objective,
            np.concatenate(best_pair),
            method="Nelder-Mead",
            options={"maxiter": maxiter, "xatol": 1e-10, "fatol": 1e-14},
        )
        if np.isfinite(res.fun) and res.fun < best:
            best = float(res.fun)
    return max(best, 0.0)


def _numeric_convexity(
    space: SpaceSpec, epsilon: float, policy: NumericsPolicy, seed: int
) -> float:
    n = space.total_dim
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((policy.grid_points * n, n))
    dirs = raw / norm_array(space, raw)[:, None]
    value = _convexity_search(
        space, epsilon, dirs[: policy.grid_points], dirs, policy.refine_iterations * 20 * n
    )
    _logger.log_numeric_modulus("convexity", epsilon, value, policy.grid_points * dirs.shape[0])
    return value


def _lattice_directions(dim: int, half_width: int, *, nonneg: bool) -> np.ndarray:
    low = 0 if nonneg else -half_width
    points = np.array(
        list(itertools.product(range(low, half_width + 1), repeat=dim)), dtype=float
    )
    return points[np.any(points != 0, axis=1)]


def _default_resolution(dim: int) -> int:
    return {1: 4, 2: 12, 3: 5}.get(dim, 3)


def monotonicity_oracle(space: SpaceSpec, epsilon: float, resolution: int | None = None) -> float:
    """Brute-force M(eps): minimum over pairs of non-negative lattice directions.

    The lattice contains the coordinate axes, so disjoint pairs are always
    among the candidates.
    """
    _check_monotonicity_epsilon(epsilon)
    n = space.total_dim
    raw = _lattice_directions(n, resolution or _default_resolution(n) + 2, nonneg=True)
    dirs = raw / norm_array(space, raw)[:, None]
    best = math.inf
    for x in dirs:
        best = min(best, float(np.min(norm_array(space, x[None, :] + epsilon * dirs))) - 1.0)
    return max(best, 0.0)


def convexity_oracle(
    space: SpaceSpec,
    epsilon: float,
    resolution: int | None = None,
    *,
    refine_maxiter: int = 4000,
) -> float:
    """Brute-force delta(eps) over lattice directions, polished by Nelder-Mead.

    For each pair (x, z) of normalized lattice directions with |x - z| >= eps,
    the point y at distance exactly eps is found by bisection along the
    normalized chord from x to z. For leaves, x is restricted to the chamber
    x_1 >= ... >= x_n >= 0 (leaf norms are invariant under coordinate
    permutations and sign changes).
    """
    _check_convexity_epsilon(epsilon)
    n = space.total_dim
    width = resolution or _default_resolution(n)
    z_raw = _lattice_directions(n, width, nonneg=False)
    if space.is_leaf:
        x_raw = _lattice_directions(n, width, nonneg=True)
        x_raw = x_raw[np.all(np.diff(x_raw, axis=1) <= 0, axis=1)]
    else:
        x_raw = z_raw
    x_dirs = x_raw / norm_array(space, x_raw)[:, None]
    z_dirs = z_raw / norm_array(space, z_raw)[:, None]
    return _convexity_search(space, epsilon, x_dirs, z_dirs, refine_maxiter)
