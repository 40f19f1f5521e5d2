"""Bishop-Phelps-Bollobas constructions for functionals and for operators into C(K).

bpb_point moves an almost-norming pair (x, f) to a norming pair (y, g) that
is close in both coordinates. perturb_compact and perturb_general turn an
operator T almost attaining its norm at x0 into a norm-attaining S close to
T by pushing every row T*(delta_t) towards the new functional and retracting
back into the dual ball.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize

from retlab.core.base import RetractionHandle
from retlab.core.errors import (
    BumpInvalidError,
    DimensionMismatchError,
    NonSmoothPointError,
    PreconditionModulusError,
    PremiseViolationError,
    SearchExhaustedError,
    UnsupportedSpaceError,
)
from retlab.core.logging import LabLogger
from retlab.core.models import C0Sum, L1Sum, LpSpace, LpSum, NumericsPolicy, SpaceSpec, SupSpace
from retlab.operators import OperatorIntoC0, operator_norm, sup_norm_image
from retlab.policies import default_policy
from retlab.retractions.radial import radial_retract
from retlab.spaces import (
    DualElement,
    PrimalVector,
    conjugate_exponent,
    dual_norm,
    dual_norm_array,
    duality_map,
    is_smooth,
    norm,
    norm_array,
    norming_point,
    pair,
    random_directions,
)

_logger = LabLogger("retlab.bpb")

_UNIT_TOL = 1e-9


class BPBResult(NamedTuple):
    """Norming pair produced by bpb_point and how it was found.

    strategy: "norming", "path", "descent" or "blocks"
    search_parameter: path parameter s ("path"), block mode s ("blocks"),
        None otherwise
    threshold: block split r of the "blocks" strategy, None otherwise
    """

    y: PrimalVector
    g: DualElement
    strategy: str
    search_parameter: float | None
    threshold: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "y": self.y.coords.tolist(),
            "g": self.g.coords.tolist(),
            "strategy": self.strategy,
            "search_parameter": self.search_parameter,
            "threshold": self.threshold,
        }


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def _check_unit_point(space: SpaceSpec, x: PrimalVector) -> None:
    if x.space != space:
        raise DimensionMismatchError(f"point lives in {x.space!r}, not {space!r}")
    if abs(norm(space, x) - 1.0) > _UNIT_TOL:
        raise PremiseViolationError(f"|x| = {norm(space, x)} is not 1")


_SCALAR = LpSpace(p=2.0, dim=1)

# Fractions of eps tried as 1 - r, and block modes s (0 keeps the point, 1 the functional)
_BLOCK_SPLITS = (1.0, 0.75, 0.5, 0.25)
_BLOCK_MODES = (0.0, 1.0, 0.5)


def _block_layout(space: SpaceSpec) -> tuple[str, tuple[SpaceSpec, ...]]:
    """How a non-smooth norm combines its blocks; coordinates count as scalar blocks."""
    match space:
        case SupSpace(dim=dim):
            return "max", (_SCALAR,) * dim
        case LpSpace(p=p, dim=dim) if p == 1.0:
            return "sum", (_SCALAR,) * dim
        case C0Sum(components=components):
            return "max", components
        case L1Sum(components=components):
            return "sum", components
        case LpSum(components=components):
            return "lp", components
    raise UnsupportedSpaceError(f"no block layout for {space!r}")


def _block_pair(
    space: SpaceSpec, u: np.ndarray, h: np.ndarray, split: float, mode: float
) -> tuple[np.ndarray, np.ndarray] | None:
    """Exact norming pair (v, k) near the unit pair (u, h), or None.

    Smooth spaces move along normalize((1 - mode) u + mode y_h) with k = J(v).
    Max- and sum-type norms keep the blocks where h nearly norms u (ratio
    above 1 - split), solve those recursively and drop the rest; the
    convex-series bound limits the dropped mass.
    """
    if is_smooth(space):
        if mode <= 0.0:
            return u, duality_map(space, u).coords
        target = norming_point(space, h).coords
        z = (1.0 - mode) * u + mode * target
        size = float(norm_array(space, z))
        if mode >= 1.0 or size == 0.0:
            return target, h
        v = z / size
        return v, duality_map(space, v).coords

    layout, blocks = _block_layout(space)
    offsets = np.cumsum([0, *(b.total_dim for b in blocks)])
    spans = [slice(int(lo), int(hi)) for lo, hi in zip(offsets[:-1], offsets[1:], strict=True)]
    sizes = np.array([float(norm_array(b, u[sl])) for b, sl in zip(blocks, spans, strict=True)])
    weights = np.array([dual_norm(b, h[sl]) for b, sl in zip(blocks, spans, strict=True)])
    usable = (sizes > 0.0) & (weights > 0.0)
    scale = weights if layout == "max" else sizes
    ratios = np.full(len(blocks), -np.inf)
    ratios[usable] = np.array([float(h[sl] @ u[sl]) for sl in spans])[usable] / scale[usable]
    members = usable if layout == "lp" else usable & (ratios > 1.0 - split)

    pairs: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for j in np.flatnonzero(members):
        sl = spans[j]
        found = _block_pair(blocks[j], u[sl] / sizes[j], h[sl] / weights[j], split, mode)
        if found is not None:
            pairs[int(j)] = found
    if not pairs:
        return None
    kept = np.array(sorted(pairs))

    v = np.zeros_like(u)
    k = np.zeros_like(h)
    match layout:
        case "max":
            mass = float(weights[kept].sum())
            v[:] = u
            for j, (vj, kj) in pairs.items():
                v[spans[j]] = vj
                k[spans[j]] = weights[j] / mass * kj
        case "sum":
            mass = float(sizes[kept].sum())
            k[:] = h
            for j, (vj, kj) in pairs.items():
                v[spans[j]] = sizes[j] / mass * vj
                k[spans[j]] = kj
        case _:
            p = space.p  # type: ignore[union-attr]
            q = conjugate_exponent(p)
            raw = np.zeros(len(blocks))
            raw[kept] = sizes[kept] if mode < 0.5 else weights[kept] ** (q - 1.0)
            w = raw / float(np.linalg.norm(raw, ord=p))
            for j, (vj, kj) in pairs.items():
                v[spans[j]] = w[j] * vj
                k[spans[j]] = w[j] ** (p - 1.0) * kj
    return v, k


def bpb_point(
    space: SpaceSpec,
    x: PrimalVector,
    f: DualElement,
    epsilon: float,
    policy: NumericsPolicy | None = None,
    logger: LabLogger | None = None,
) -> BPBResult:
    """Norming pair (y, g) with |x - y| < eps and |f - g| < eps.

    Tried in order: y = the norming point of f with g = f; then, on smooth
    spaces, the first s on the path y(s) = normalize((1 - s) x + s y(1)),
    g(s) = J(y(s)), refined by bisection, and a Nelder-Mead descent on
    max(|x - y|, |f - g|). Sup, l_1 and sum spaces instead split x and f
    into blocks and rebuild a norming pair from the blocks where f nearly
    norms x.

    Raises:
        PremiseViolationError: If x or f is not a unit vector or <f, x> <= 1 - eps^2/4
        SearchExhaustedError: If every strategy fails (an implementation bug)
    """
    policy = policy or default_policy()
    logger = logger or _logger
    _check_epsilon(epsilon)
    _check_unit_point(space, x)
    if f.space != space:
        raise DimensionMismatchError(f"functional lives on {f.space!r}, not {space!r}")
    if abs(dual_norm(space, f) - 1.0) > _UNIT_TOL:
        raise PremiseViolationError(f"|f| = {dual_norm(space, f)} is not 1")
    if pair(f, x) <= 1.0 - epsilon**2 / 4.0:
        raise PremiseViolationError(
            f"<f, x> = {pair(f, x)} does not exceed 1 - eps^2/4 = {1.0 - epsilon**2 / 4.0}"
        )

    def gaps(y: np.ndarray, g: np.ndarray) -> tuple[float, float]:
        return float(norm_array(space, x.coords - y)), dual_norm(space, f.coords - g)

    def feasible(y: np.ndarray, g: np.ndarray) -> bool:
        dx, df = gaps(y, g)
        return dx < epsilon and df < epsilon

    try:
        target = norming_point(space, f).coords
    except NonSmoothPointError:
        target = None
    if target is not None and feasible(target, f.coords):
        logger.log_bpb_search("norming", epsilon, None)
        return BPBResult(PrimalVector(space, target), f, "norming", None)

    if not is_smooth(space):
        closest = np.inf
        for fraction in _BLOCK_SPLITS:
            split = fraction * epsilon
            for mode in _BLOCK_MODES:
                found = _block_pair(space, x.coords, f.coords, split, mode)
                if found is None:
                    continue
                if feasible(*found):
                    y, g = found
                    logger.log_bpb_search("blocks", epsilon, mode)
                    return BPBResult(
                        PrimalVector(space, y), DualElement(space, g), "blocks", mode, 1.0 - split
                    )
                closest = min(closest, max(gaps(*found)))
        logger.log_search_exhausted(epsilon, float(closest))
        raise SearchExhaustedError(f"no norming pair within {epsilon} found")

    assert target is not None  # unique on smooth spaces

    def path(s: float) -> tuple[np.ndarray, np.ndarray]:
        z = (1.0 - s) * x.coords + s * target
        y = z / float(norm_array(space, z))
        return y, duality_map(space, y).coords

    grid = np.linspace(0.0, 1.0, policy.bpb_path_points)
    previous = None
    for s in grid:
        if feasible(*path(float(s))):
            if previous is None:
                best = float(s)
            else:
                lo, hi = previous, float(s)
                for _ in range(policy.bisection_maxiter):
                    if hi - lo <= policy.bisection_xtol:
                        break
                    mid = 0.5 * (lo + hi)
                    if feasible(*path(mid)):
                        hi = mid
                    else:
                        lo = mid
                best = hi
            y, g = path(best)
            logger.log_bpb_search("path", epsilon, best)
            return BPBResult(PrimalVector(space, y), DualElement(space, g), "path", best)
        previous = float(s)

    def objective(z: np.ndarray) -> float:
        n = float(norm_array(space, z))
        if n == 0.0:
            return np.inf
        y = z / n
        dx, df = gaps(y, duality_map(space, y).coords)
        return max(dx, df)

    result = minimize(objective, x.coords + target, method="Nelder-Mead")
    z = np.asarray(result.x, dtype=float)
    if np.isfinite(result.fun) and result.fun < epsilon:
        y = z / float(norm_array(space, z))
        logger.log_bpb_search("descent", epsilon, None)
        return BPBResult(PrimalVector(space, y), duality_map(space, y), "descent", None)

    logger.log_search_exhausted(epsilon, float(result.fun))
    raise SearchExhaustedError(f"no norming pair within {epsilon} found")


@dataclass
class PerturbationCertificate:
    """Everything needed to audit one perturbation S of T.

    distance is |S - T| for T normalised to norm one; scale is the original |T|.
    sign is the real sign of (T x0)(t0); the new functional is sign * g.
    """

    theorem: str
    epsilon: float
    eta_used: float
    new_operator: OperatorIntoC0
    attaining_point: PrimalVector
    attaining_functional: DualElement
    witness_label: str
    distance: float
    bound: float
    scale: float
    point_shift: float
    sign: float
    norm_S: float
    norm_Sx1: float
    bpb: BPBResult
    conclusion_bound: float | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def verify(self, tol: float = 1e-9) -> bool:
        """|S| = |S x1| = 1, distance <= bound and, when stated, the strict conclusion."""
        ok = (
            abs(self.norm_S - 1.0) <= tol
            and abs(self.norm_Sx1 - 1.0) <= tol
            and self.distance <= self.bound + tol
        )
        if self.conclusion_bound is not None:
            ok = ok and self.distance < self.conclusion_bound and self.point_shift < self.conclusion_bound
        return ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem": self.theorem,
            "epsilon": self.epsilon,
            "eta_used": self.eta_used,
            "new_operator": self.new_operator.to_dict(),
            "attaining_point": self.attaining_point.coords.tolist(),
            "attaining_functional": self.attaining_functional.coords.tolist(),
            "witness_label": self.witness_label,
            "distance": self.distance,
            "bound": self.bound,
            "scale": self.scale,
            "point_shift": self.point_shift,
            "sign": self.sign,
            "norm_S": self.norm_S,
            "norm_Sx1": self.norm_Sx1,
            "conclusion_bound": self.conclusion_bound,
            "bpb": self.bpb.to_dict(),
            **self.extra,
        }


class _Premise(NamedTuple):
    normalized: OperatorIntoC0
    scale: float
    witness: int
    sign: float
    functional: DualElement


def _premise(T: OperatorIntoC0, x0: PrimalVector, epsilon: float, eta: float) -> _Premise:
    _check_epsilon(epsilon)
    _check_unit_point(T.domain, x0)
    scale = operator_norm(T)
    if scale == 0.0:
        raise PremiseViolationError("the zero operator cannot be normalised")
    normalized = T.scaled(1.0 / scale)
    images = np.abs(normalized.apply(x0))
    top = float(np.max(images))
    if top <= 1.0 - eta:
        raise PremiseViolationError(f"|T x0| = {top} does not exceed 1 - eta = {1.0 - eta}")
    # ties go to the first point of K in its stored order
    witness = int(np.flatnonzero(images >= top - 1e-15)[0])
    value = float(normalized.apply(x0)[witness])
    sign = 1.0 if value >= 0.0 else -1.0
    row = normalized.rows[witness]
    functional = DualElement(T.domain, sign * row / dual_norm(T.domain, row))
    return _Premise(normalized, scale, int(witness), sign, functional)


def _certificate(
    theorem: str,
    premise: _Premise,
    rows: np.ndarray,
    x0: PrimalVector,
    result: BPBResult,
    epsilon: float,
    eta: float,
    bound: float,
    conclusion_bound: float | None,
    logger: LabLogger,
) -> PerturbationCertificate:
    T = premise.normalized
    S = OperatorIntoC0(T.domain, T.points, rows)
    new_functional = DualElement(T.domain, premise.sign * result.g.coords)
    distance = float(np.max(dual_norm_array(T.domain, rows - T.rows)))
    certificate = PerturbationCertificate(
        theorem=theorem,
        epsilon=epsilon,
        eta_used=eta,
        new_operator=S,
        attaining_point=result.y,
        attaining_functional=new_functional,
        witness_label=T.points[premise.witness],
        distance=distance,
        bound=bound,
        scale=premise.scale,
        point_shift=norm(T.domain, x0.coords - result.y.coords),
        sign=premise.sign,
        norm_S=operator_norm(S),
        norm_Sx1=sup_norm_image(S, result.y),
        bpb=result,
        conclusion_bound=conclusion_bound,
    )
    logger.log_perturbation_certified(theorem, epsilon, distance, bound)
    return certificate


def perturb_compact(
    T: OperatorIntoC0,
    x0: PrimalVector,
    epsilon: float,
    policy: NumericsPolicy | None = None,
    logger: LabLogger | None = None,
) -> PerturbationCertificate:
    """Norm-attaining S with |S - T| <= 4 eps from |T x0| > 1 - eps^2/64.

    T is normalised first. The functional BPB step runs at eps/4 and every new
    row is the radial retraction of row(t) + x1* - row(t0).
    """
    logger = logger or _logger
    eta = epsilon**2 / 64.0
    premise = _premise(T, x0, epsilon, eta)
    result = bpb_point(T.domain, x0, premise.functional, epsilon / 4.0, policy, logger)
    new_functional = premise.sign * result.g.coords
    shift = new_functional - premise.normalized.rows[premise.witness]
    rows = np.array(
        [
            radial_retract(T.domain, DualElement(T.domain, row + shift)).coords
            for row in premise.normalized.rows
        ]
    )
    return _certificate(
        "compact", premise, rows, x0, result, epsilon, eta, 4.0 * epsilon, epsilon, logger
    )


def _bump_values(T: OperatorIntoC0, witness: int, bump: Mapping[str, float] | None) -> np.ndarray:
    values = np.zeros(len(T.points))
    if bump is None:
        values[witness] = 1.0
        return values
    unknown = set(map(str, bump)) - set(T.points)
    if unknown:
        raise BumpInvalidError(f"bump defined at unknown points {sorted(unknown)}")
    for label, value in bump.items():
        if not 0.0 <= float(value) <= 1.0:
            raise BumpInvalidError(f"bump({label}) = {value} lies outside [0, 1]")
        values[T.index(str(label))] = float(value)
    if values[witness] != 1.0:
        raise BumpInvalidError(f"bump must equal 1 at the witness point {T.points[witness]!r}")
    return values


def perturb_general(
    T: OperatorIntoC0,
    x0: PrimalVector,
    epsilon: float,
    handle: RetractionHandle,
    bump: Mapping[str, float] | None = None,
    policy: NumericsPolicy | None = None,
    logger: LabLogger | None = None,
) -> PerturbationCertificate:
    """Norm-attaining S with |S - T| <= 4 eps + f(2 eps) from |T x0| > 1 - eps^2/4.

    Rows are handle(row(t) + bump(t) (x1* - row(t0))) where f is the handle's
    nearest-point function; ``bump`` defaults to the indicator of t0.

    Raises:
        PreconditionModulusError: If the handle has no nearest-point function
        BumpInvalidError: If bump is not [0, 1]-valued with bump(t0) = 1
    """
    logger = logger or _logger
    if handle.space != T.domain:
        raise DimensionMismatchError(f"handle retracts the dual of {handle.space!r}, not {T.domain!r}")
    slack = handle.nearest_point_f(2.0 * epsilon)
    if slack is None:
        raise PreconditionModulusError(f"{handle.kind.value} handle has no nearest-point function")
    eta = epsilon**2 / 4.0
    premise = _premise(T, x0, epsilon, eta)
    weights = _bump_values(premise.normalized, premise.witness, bump)
    result = bpb_point(T.domain, x0, premise.functional, epsilon, policy, logger)
    new_functional = premise.sign * result.g.coords
    shift = new_functional - premise.normalized.rows[premise.witness]
    rows = np.array(
        [
            handle.apply_coords(row + w * shift)
            for row, w in zip(premise.normalized.rows, weights, strict=True)
        ]
    )
    return _certificate(
        "general", premise, rows, x0, result, epsilon, eta, 4.0 * epsilon + slack, None, logger
    )


class ConvexSeriesResult(NamedTuple):
    """A = {i : c_i > r} (0-based), its alpha-mass, and the guaranteed floor 1 - eta/(1 - r)."""

    indices: tuple[int, ...]
    mass: float
    threshold: float
    ok: bool


def convex_series_bound(c: Any, alpha: Any, eta: float, r: float) -> ConvexSeriesResult:
    """If sum alpha_i c_i > 1 - eta then alpha(A) >= 1 - eta/(1 - r) for A = {c_i > r}.

    Raises:
        PremiseViolationError: If |c_i| > 1, alpha is not a convex weight,
            eta <= 0, r outside (0, 1) or sum alpha_i c_i <= 1 - eta
    """
    c = np.asarray(c, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if c.shape != alpha.shape or c.ndim != 1:
        raise PremiseViolationError("c and alpha must be 1-D arrays of equal length")
    if np.any(np.abs(c) > 1.0 + 1e-12):
        raise PremiseViolationError("every |c_i| must be at most 1")
    if np.any(alpha < 0.0) or abs(float(alpha.sum()) - 1.0) > 1e-9:
        raise PremiseViolationError("alpha must be non-negative and sum to 1")
    if eta <= 0.0:
        raise PremiseViolationError(f"eta must be positive, got {eta}")
    if not 0.0 < r < 1.0:
        raise PremiseViolationError(f"r must lie in (0, 1), got {r}")
    if float(alpha @ c) <= 1.0 - eta:
        raise PremiseViolationError(f"sum alpha_i c_i = {float(alpha @ c)} does not exceed 1 - eta")
    members = np.flatnonzero(c > r)
    mass = float(alpha[members].sum())
    threshold = 1.0 - eta / (1.0 - r)
    return ConvexSeriesResult(tuple(int(i) for i in members), mass, threshold, mass >= threshold - 1e-12)


def _unit(space: SpaceSpec, rng: np.random.Generator) -> np.ndarray:
    return random_directions(space, rng, 1)[0]


def _functional_at_level(
    space: SpaceSpec, x: np.ndarray, level: float, rng: np.random.Generator
) -> np.ndarray:
    """Unit functional f = normalize(J(x) + s n) with <f, x> = level, n a random dual direction.

    The pairing starts at 1 for s = 0; s is found by Brent's method once a
    bracket exists, and n is redrawn when the pairing never drops to level.
    """
    base = duality_map(space, x).coords

    def along(s: float, noise: np.ndarray) -> np.ndarray:
        f = base + s * noise
        return f / dual_norm(space, f)

    while True:
        noise = random_directions(space, rng, 1, dual=True)[0]
        high = 1.0
        while float(along(high, noise) @ x) >= level and high < 1e6:
            high *= 2.0
        if float(along(high, noise) @ x) < level:
            s = brentq(lambda t: float(along(t, noise) @ x) - level, 0.0, high, xtol=1e-14)
            return along(float(s), noise)


def random_bpb_instance(
    space: SpaceSpec, epsilon: float, rng: np.random.Generator
) -> tuple[PrimalVector, DualElement]:
    """Unit (x, f) with 1 - <f, x> drawn in (eps^2/8, eps^2/4).

    The pairing gap is a random fraction of the allowed gap, so instances sit
    near the premise boundary.
    """
    x = _unit(space, rng)
    level = 1.0 - epsilon**2 / 4.0 * float(rng.uniform(0.5, 0.999))
    f = _functional_at_level(space, x, level, rng)
    return PrimalVector(space, x), DualElement(space, f)


def random_premise_instance(
    space: SpaceSpec,
    n_points: int,
    epsilon: float,
    eta: float,
    rng: np.random.Generator,
) -> tuple[OperatorIntoC0, PrimalVector]:
    """Random T into C(K), |K| = n_points, and unit x0 with |T x0| > 1 - eta.

    The witness row is +-r0 f with f a unit functional, <f, x0> a random level
    in (1 - eta, 1 - eta/2) and r0 < 1 just large enough for the premise. A
    peak row of norm one vanishing at x0 carries the operator norm, so T is
    not attaining at x0 and the perturbation is non-trivial. The remaining
    rows have norms below 0.9 (1 - eta) and T is rescaled by a random factor.
    With a single point only the witness row is kept.
    """
    if n_points < 1:
        raise ValueError("n_points must be positive")
    if n_points > 1 and space.total_dim < 2:
        raise ValueError("a peak row vanishing at x0 needs dimension at least 2")
    x0 = _unit(space, rng)
    level = 1.0 - eta * float(rng.uniform(0.5, 0.999))
    f = _functional_at_level(space, x0, level, rng)
    floor = (1.0 - eta) / level
    radius = floor + (1.0 - floor) * float(rng.uniform(0.05, 0.95))
    sign = 1.0 if rng.uniform() < 0.5 else -1.0
    witness_row = sign * radius * f

    rows: list[np.ndarray] = []
    if n_points > 1:
        anchor = duality_map(space, x0).coords
        while True:
            d = random_directions(space, rng, 1, dual=True)[0]
            peak = d - float(d @ x0) * anchor
            size = dual_norm(space, peak)
            if size > 1e-6:
                break
        rows.append(peak / size)
        others = random_directions(space, rng, n_points - 2, dual=True)
        bound = 0.9 * (1.0 - eta)
        rows.extend(others * rng.uniform(0.0, bound, (n_points - 2, 1)))
    stacked = np.vstack([witness_row, *rows])
    stacked = stacked[rng.permutation(len(stacked))]
    factor = float(rng.uniform(0.5, 2.0))
    return OperatorIntoC0.from_rows(space, factor * stacked), PrimalVector(space, x0)


def random_lemma_instance(
    rng: np.random.Generator, size: int = 8
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """(c, alpha, eta, r) satisfying the convex-series premise strictly."""
    alpha = rng.dirichlet(np.ones(size))
    c = np.clip(1.0 - rng.exponential(0.1, size), -1.0, 1.0)
    eta = (1.0 - float(alpha @ c)) + float(rng.uniform(1e-6, 0.1))
    r = float(rng.uniform(0.05, 0.95))
    return c, alpha, eta, r

