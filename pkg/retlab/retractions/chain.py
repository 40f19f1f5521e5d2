"""c0-sum retraction built along a chain of coordinate subspaces.

For X = [+ X_i]_c0 the coordinates e_(i,j) (j-th basis vector of X_i) are
enumerated diagonally, k = (i+j-1)(i+j-2)/2 + j, and E_k is the span of the
first k of them. H_k extends a functional on E_k to X* with the same norm;
strict convexity of the duals makes that extension unique.

phi(f) = f on the ball. Otherwise n is the first k with |R_k* f| >= 1; for
n = 1 phi(f) = H_1(R_1* f / |R_1* f|), else phi(f) = H_n of the unique blend
lambda R_n* f + (1 - lambda) psi_(n-1)(R_(n-1)* f) of norm one.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import bisect, brentq, minimize

from retlab.core.base import RetractionHandle
from retlab.core.errors import (
    BisectionFailureError,
    ComponentMismatchError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    NonUniqueExtensionError,
    NotUniformlyConvexError,
    PreconditionModulusError,
    SolverDivergenceError,
    SpaceSpecError,
    UnsupportedSpaceError,
)
from retlab.core.logging import LabLogger
from retlab.core.models import (
    C0Sum,
    L1Sum,
    LpSpace,
    LpSum,
    NumericsPolicy,
    RetractionKind,
    SpaceSpec,
    SupSpace,
)
from retlab.moduli import common_convexity_floor
from retlab.policies import default_policy
from retlab.spaces import DualElement, component_offsets, dual_norm_array, dual_space, norm_array

ExtensionMethod = Literal["closed_form", "iterative"]

_logger = LabLogger("retlab.chain")

_EXTENSION_XATOL = 1e-9


def chain_index(i: int, j: int) -> int:
    """Diagonal enumeration k(i, j) = (i+j-1)(i+j-2)/2 + j, bijective onto 1, 2, ..."""
    if i < 1 or j < 1:
        raise ValueError(f"chain_index needs i, j >= 1, got ({i}, {j})")
    return (i + j - 1) * (i + j - 2) // 2 + j


def chain_position(k: int) -> tuple[int, int]:
    """Inverse of chain_index."""
    if k < 1:
        raise ValueError(f"chain_position needs k >= 1, got {k}")
    s = (1 + math.isqrt(8 * k - 7)) // 2 + 1
    while s * (s - 1) // 2 < k:
        s += 1
    while (s - 1) * (s - 2) // 2 >= k:
        s -= 1
    j = k - (s - 1) * (s - 2) // 2
    return s - j, j


@dataclass(frozen=True)
class SubspaceChain:
    """E_1 c E_2 c ... c E_K over finitely many finite-dimensional components.

    Attributes:
        component_dims: dim X_i for each component, in order
    """

    component_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.component_dims)
        if not dims or any(d < 1 for d in dims):
            raise SpaceSpecError(f"component dimensions must be positive, got {dims}")
        object.__setattr__(self, "component_dims", dims)

    @classmethod
    def from_space(cls, space: SpaceSpec) -> SubspaceChain:
        if space.is_leaf:
            return cls((space.total_dim,))
        return cls(tuple(c.total_dim for c in space.components))  # type: ignore[union-attr]

    @cached_property
    def steps(self) -> tuple[tuple[int, int], ...]:
        """(i, j) pairs (1-based) in chain order, skipping j > dim X_i."""
        m = len(self.component_dims)
        out = []
        for s in range(2, m + max(self.component_dims) + 1):
            for j in range(1, s):
                i = s - j
                if i <= m and j <= self.component_dims[i - 1]:
                    out.append((i, j))
        return tuple(out)

    @cached_property
    def order(self) -> np.ndarray:
        """Flat 0-based coordinate added at each step."""
        offsets = np.cumsum((0,) + self.component_dims)
        order = np.array([offsets[i - 1] + j - 1 for i, j in self.steps], dtype=int)
        order.setflags(write=False)
        return order

    def __len__(self) -> int:
        return len(self.steps)

    def subspace(self, k: int) -> frozenset[int]:
        """Flat coordinates spanning E_k (E_0 = {0})."""
        if not 0 <= k <= len(self):
            raise IndexOutOfRangeError(f"chain step {k} outside 0..{len(self)}")
        return frozenset(int(c) for c in self.order[:k])

    def masks(self) -> np.ndarray:
        """Row k - 1 is the indicator of E_k."""
        n = len(self)
        masks = np.zeros((n, n))
        for k in range(n):
            masks[k, self.order[: k + 1]] = 1.0
        return masks


def _extension_has_slack(
    norm_space: SpaceSpec, coords: np.ndarray, free: np.ndarray, cap: float, tol: float
) -> bool:
    """True if a free coordinate can move off zero while the norm stays <= ``cap``.

    ``norm_space`` is the space the functional is measured in (the dual).
    """
    if not np.any(free) or cap <= tol:
        return False
    match norm_space:
        case SupSpace():
            return True
        case LpSpace():
            return float(norm_array(norm_space, coords)) < cap - tol
    offsets = component_offsets(norm_space)
    components = norm_space.components  # type: ignore[union-attr]
    blocks = [slice(offsets[i], offsets[i + 1]) for i in range(len(components))]
    block_norms = np.array(
        [float(norm_array(c, coords[b])) for c, b in zip(components, blocks, strict=True)]
    )
    match norm_space:
        case L1Sum():
            caps = cap - (block_norms.sum() - block_norms)
        case C0Sum():
            caps = np.full(block_norms.size, cap)
        case LpSum(p=p):
            rest = np.sum(block_norms**p) - block_norms**p
            caps = np.maximum(cap**p - rest, 0.0) ** (1.0 / p)
        case _:
            raise UnsupportedSpaceError(f"no extension theory for {norm_space!r}")
    return any(
        _extension_has_slack(c, coords[b], free[b], float(cap_i), tol)
        for c, b, cap_i in zip(components, blocks, caps, strict=True)
    )


def hahn_banach_min_extension(
    space: SpaceSpec,
    subspace: Iterable[int],
    g: ArrayLike,
    method: ExtensionMethod = "closed_form",
    policy: NumericsPolicy | None = None,
    logger: LabLogger | None = None,
) -> DualElement:
    """Norm-preserving extension of a functional on a coordinate subspace.

    Args:
        space: Primal space X
        subspace: Flat 0-based coordinates spanning the subspace
        g: Values of the functional on the subspace, in increasing coordinate order
        method: "closed_form" (zero extension, minimal in every lattice dual)
            or "iterative" (simplex search minimising the dual norm of the
            whole functional over the free coordinates)
        policy: Iteration cap and tolerance of the iterative solver

    Raises:
        NonUniqueExtensionError: If the dual norm leaves room to move a free coordinate
        SolverDivergenceError: If the iterative solver hits its iteration cap
    """
    policy = policy or default_policy()
    logger = logger or _logger
    dim = space.total_dim
    indices = np.array(sorted(set(int(i) for i in subspace)), dtype=int)
    if indices.size and (indices[0] < 0 or indices[-1] >= dim):
        raise IndexOutOfRangeError(f"subspace coordinates must lie in 0..{dim - 1}")
    values = np.asarray(g, dtype=float).reshape(-1)
    if values.size != indices.size:
        raise DimensionMismatchError(
            f"{values.size} values for a {indices.size}-dimensional subspace"
        )

    base = np.zeros(dim)
    base[indices] = values
    free = np.ones(dim, dtype=bool)
    free[indices] = False
    dual = dual_space(space)
    cap = float(dual_norm_array(space, base))
    if _extension_has_slack(dual, base, free, cap, policy.equality_tol):
        raise NonUniqueExtensionError(
            f"extension from {indices.size} coordinates is not unique in the dual of {space.kind}"
        )
    if method == "closed_form" or not np.any(free):
        return DualElement(space, base)
    if method != "iterative":
        raise ValueError(f"Unknown extension method: {method}")

    def objective(h: np.ndarray) -> float:
        candidate = np.array(base)
        candidate[free] = h
        return float(dual_norm_array(space, candidate))

    # start off zero so the search has to find the minimiser
    start = np.full(int(free.sum()), 0.5 * max(cap, 1.0))
    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={
            "maxiter": policy.extension_maxiter,
            "maxfev": 2 * policy.extension_maxiter,
            "xatol": _EXTENSION_XATOL,
            "fatol": policy.extension_tol,
        },
    )
    if not result.success:
        raise SolverDivergenceError(
            f"extension solver stopped after {result.nit} iterations: {result.message}"
        )
    logger.log_extension_solved("iterative", int(result.nit), int(free.sum()))
    out = np.array(base)
    out[free] = result.x
    return DualElement(space, out)


@lru_cache(maxsize=4096)
def _chain_epsilon(space: SpaceSpec, t: float) -> float:
    """epsilon with common_floor(epsilon)^2 = t, or 2 past the top of the range."""
    top = 2.0 - 1e-12

    def excess(eps: float) -> float:
        return common_convexity_floor(space, eps) ** 2 - t

    if excess(top) <= 0.0:
        return 2.0
    if excess(1e-12) >= 0.0:
        return 0.0
    return float(brentq(excess, 1e-12, top, xtol=1e-14))


class C0ChainRetraction(RetractionHandle):
    """Chain retraction on the dual of a c0-sum of l_p leaves, 1 < p < inf.

    Raises:
        PreconditionModulusError: If the components are not such leaves or the
            common convexity floor of their duals is not positive
    """

    kind = RetractionKind.C0CHAIN

    def __init__(
        self,
        space: SpaceSpec,
        policy: NumericsPolicy | None = None,
        logger: LabLogger | None = None,
        *,
        extension_method: ExtensionMethod = "closed_form",
    ) -> None:
        super().__init__(space, policy, logger)
        if not isinstance(space, C0Sum):
            raise UnsupportedSpaceError(f"chain retraction needs a c0sum space, got {space.kind}")
        for c in space.components:
            if not (isinstance(c, LpSpace) and 1.0 < c.p):
                raise PreconditionModulusError(
                    f"component {c!r} has no proven convexity floor for its dual"
                )
        self.dual = dual_space(space)
        try:
            floor = common_convexity_floor(self.dual, 1.0, self.policy)
        except NotUniformlyConvexError as e:
            raise PreconditionModulusError(str(e)) from e
        if floor <= 0.0:
            raise PreconditionModulusError("common convexity floor of the duals is not positive")
        self.chain = SubspaceChain.from_space(space)
        self.extension_method = extension_method
        self._masks = self.chain.masks()
        self.logger.log_retraction_built(
            self.kind.value,
            space.model_dump(mode="json"),
            steps=len(self.chain),
            extension=extension_method,
        )

    def crossing_step(self, coords: np.ndarray) -> int:
        """n(f) as a 1-based chain step; len(chain) + 1 if no step reaches 1."""
        norms = dual_norm_array(self.space, self._masks * np.asarray(coords, dtype=float)[None, :])
        hits = np.flatnonzero(norms >= 1.0)
        return int(hits[0]) + 1 if hits.size else len(self.chain) + 1

    def _extend(self, k: int, restricted: np.ndarray) -> np.ndarray:
        subspace = self.chain.order[:k]
        values = restricted[np.sort(subspace)]
        h = hahn_banach_min_extension(
            self.space, subspace, values, self.extension_method, self.policy, self.logger
        )
        return np.array(h.coords)

    def _retract(self, coords: np.ndarray, size: float) -> np.ndarray:
        n = self.crossing_step(coords)
        first = self.chain.order[0]
        if n == 1:
            restricted = np.zeros_like(coords)
            restricted[first] = coords[first]
            return self._extend(1, restricted / float(dual_norm_array(self.space, restricted)))

        base = self._masks[n - 2] * coords
        step = np.zeros_like(coords)
        c = self.chain.order[n - 1]
        step[c] = coords[c]

        # psi_(n-1)(R_(n-1)* f) restricts base to E_n, so the blend moves coordinate c only
        def gap(lam: float) -> float:
            return float(dual_norm_array(self.space, base + lam * step)) - 1.0

        low, high = gap(0.0), gap(1.0)
        if high == 0.0:
            lam = 1.0
        elif not (low < 0.0 < high):
            self.logger.log_bisection_failed("c0chain", low, high)
            raise BisectionFailureError(
                f"degenerate bracket at chain step {n}: gap(0)={low}, gap(1)={high}"
            )
        else:
            lam = float(
                bisect(
                    gap,
                    0.0,
                    1.0,
                    xtol=self.policy.bisection_xtol,
                    maxiter=self.policy.bisection_maxiter,
                )
            )
        return self._extend(n, base + lam * step)

    def chain_epsilon(self, t: float) -> float:
        """epsilon(t) with delta(epsilon)^2 = t for the common floor of the duals."""
        return _chain_epsilon(self.dual, float(t))

    def modulus_bound(self, t: float) -> float | None:
        """min(2, eps + 9 delta^2 + 2 delta) at delta(eps)^2 = t."""
        if t <= 0.0:
            return 0.0
        eps = self.chain_epsilon(t)
        return min(self.policy.ball_diameter, eps + 9.0 * t + 2.0 * math.sqrt(t))

    def nearest_point_f(self, d: float) -> float | None:
        return self.modulus_bound(d)

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["extension_method"] = self.extension_method
        return data


def c0_sum_retract(
    chain: SubspaceChain, f: DualElement, policy: NumericsPolicy | None = None
) -> DualElement:
    """Chain retraction of a functional on a c0-sum whose blocks match ``chain``.

    Raises:
        ComponentMismatchError: If ``chain`` was built for other component dimensions
    """
    if SubspaceChain.from_space(f.space) != chain:
        raise ComponentMismatchError(
            f"chain over {chain.component_dims} does not match {f.space!r}"
        )
    return C0ChainRetraction(f.space, policy).apply(f)
