"""Norms, duality and coordinate plumbing on desk-scale sequence spaces.

Vectors are flat float arrays; nested sums are flattened in component order
and component_offsets() records where each block starts. A DualElement is
tagged with its *primal* space and measured with the dual norm of that
space. Every norm routine is batched over the last axis so retractions and
estimators can evaluate many candidates at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from retlab.core.errors import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    NonSmoothPointError,
    UnsupportedSpaceError,
    ZeroFunctionalError,
)
from retlab.core.models import C0Sum, L1Sum, LpSpace, LpSum, SpaceSpec, SupSpace, parse_space

_TIE_TOL = 1e-12


def conjugate_exponent(p: float) -> float:
    """q with 1/p + 1/q = 1 for 1 < p < inf."""
    return p / (p - 1.0)


@lru_cache(maxsize=256)
def dual_space(space: SpaceSpec) -> SpaceSpec:
    """Spec of the dual space.

    lp(1) <-> sup, lp(p) -> lp(q), l1sum -> c0sum of duals, c0sum -> l1sum
    of duals, lpsum(p) -> lpsum(q) of duals.
    """
    match space:
        case LpSpace(p=p, dim=dim):
            if p == 1.0:
                return SupSpace(dim=dim)
            return LpSpace(p=conjugate_exponent(p), dim=dim)
        case SupSpace(dim=dim):
            return LpSpace(p=1.0, dim=dim)
        case L1Sum(components=components):
            return C0Sum(components=tuple(dual_space(c) for c in components))
        case C0Sum(components=components):
            return L1Sum(components=tuple(dual_space(c) for c in components))
        case LpSum(p=p, components=components):
            return LpSum(p=conjugate_exponent(p), components=tuple(dual_space(c) for c in components))
    raise UnsupportedSpaceError(f"No dual known for {space!r}")


@lru_cache(maxsize=256)
def component_offsets(space: SpaceSpec) -> tuple[int, ...]:
    """Start offsets of each component block, followed by the total dimension."""
    if space.is_leaf:
        return (0, space.total_dim)
    offsets = [0]
    for component in space.components:  # type: ignore[union-attr]
        offsets.append(offsets[-1] + component.total_dim)
    return tuple(offsets)


def component_block(coords: ArrayLike, space: SpaceSpec, index: int) -> np.ndarray:
    """Coordinates of component ``index`` (0-based) of a sum."""
    offsets = component_offsets(space)
    if not 0 <= index < len(offsets) - 1:
        raise IndexOutOfRangeError(f"component {index} outside 0..{len(offsets) - 2}")
    arr = np.asarray(coords, dtype=float)
    return arr[..., offsets[index] : offsets[index + 1]]


def is_smooth(space: SpaceSpec) -> bool:
    """Whether every non-zero functional has exactly one norming point.

    True for l_p leaves with 1 < p < inf and for lp-sums built from them.
    """
    match space:
        case LpSpace(p=p):
            return p > 1.0
        case LpSum(components=components):
            return all(is_smooth(c) for c in components)
    return False


def _components(space: SpaceSpec) -> tuple[SpaceSpec, ...]:
    return space.components if not space.is_leaf else (space,)  # type: ignore[union-attr]


@dataclass(frozen=True, eq=False)
class _TaggedCoords:
    space: SpaceSpec
    coords: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coords, dtype=float)
        if arr.ndim != 1 or arr.size != self.space.total_dim:
            raise DimensionMismatchError(
                f"expected {self.space.total_dim} coordinates, got shape {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    def __len__(self) -> int:
        return int(self.coords.size)

    def block(self, index: int) -> np.ndarray:
        return component_block(self.coords, self.space, index)

    def to_dict(self) -> dict[str, Any]:
        return {"space": self.space.model_dump(mode="json"), "coords": self.coords.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Any:
        return cls(space=parse_space(data["space"]), coords=np.asarray(data["coords"], dtype=float))


@dataclass(frozen=True, eq=False)
class PrimalVector(_TaggedCoords):
    """A point x of the primal space."""


@dataclass(frozen=True, eq=False)
class DualElement(_TaggedCoords):
    """A functional x* on ``space``, measured with the dual norm of ``space``."""


def norm_array(space: SpaceSpec, arr: ArrayLike) -> np.ndarray:
    """Norm of ``space`` applied along the last axis of ``arr``."""
    a = np.asarray(arr, dtype=float)
    if a.shape[-1] != space.total_dim:
        raise DimensionMismatchError(
            f"expected {space.total_dim} coordinates, got {a.shape[-1]}"
        )
    match space:
        case LpSpace(p=p):
            if p == 1.0:
                return np.sum(np.abs(a), axis=-1)
            if p == 2.0:
                return np.sqrt(np.sum(a * a, axis=-1))
            return np.linalg.norm(a, ord=p, axis=-1)
        case SupSpace():
            return np.max(np.abs(a), axis=-1)
    blocks = _block_norms(space, a)
    match space:
        case L1Sum():
            return np.sum(blocks, axis=-1)
        case C0Sum():
            return np.max(blocks, axis=-1)
        case LpSum(p=p):
            return np.linalg.norm(blocks, ord=p, axis=-1)
    raise UnsupportedSpaceError(f"No norm known for {space!r}")


def _block_norms(space: SpaceSpec, a: np.ndarray) -> np.ndarray:
    offsets = component_offsets(space)
    return np.stack(
        [
            norm_array(c, a[..., offsets[i] : offsets[i + 1]])
            for i, c in enumerate(_components(space))
        ],
        axis=-1,
    )


def dual_norm_array(space: SpaceSpec, arr: ArrayLike) -> np.ndarray:
    """Dual norm of ``space`` along the last axis."""
    return norm_array(dual_space(space), arr)


def _checked(space: SpaceSpec, v: Any) -> np.ndarray:
    if isinstance(v, _TaggedCoords):
        if v.space != space:
            raise DimensionMismatchError(f"vector lives in {v.space!r}, not {space!r}")
        return v.coords
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size != space.total_dim:
        raise DimensionMismatchError(
            f"expected {space.total_dim} coordinates, got shape {arr.shape}"
        )
    return arr


def norm(space: SpaceSpec, v: PrimalVector | ArrayLike) -> float:
    """Norm of a primal vector."""
    return float(norm_array(space, _checked(space, v)))


def dual_norm(space: SpaceSpec, f: DualElement | ArrayLike) -> float:
    """Dual norm of a functional on ``space``."""
    return float(dual_norm_array(space, _checked(space, f)))


def pair(f: DualElement, v: PrimalVector) -> float:
    """Bilinear pairing <f, v>."""
    if f.space != v.space:
        raise DimensionMismatchError("functional and vector live in different spaces")
    return float(np.dot(f.coords, v.coords))


def truncate(f: DualElement, n: int) -> DualElement:
    """Zero every coordinate after the first ``n`` (adjoint of the basis projection P_n)."""
    dim = f.space.total_dim
    if not 0 <= n <= dim:
        raise IndexOutOfRangeError(f"truncation index {n} outside 0..{dim}")
    coords = np.array(f.coords)
    coords[n:] = 0.0
    return DualElement(f.space, coords)


def _unique_argmax(values: np.ndarray, what: str) -> int:
    top = float(np.max(values))
    winners = np.flatnonzero(values >= top - _TIE_TOL * max(top, 1.0))
    if winners.size > 1:
        raise NonSmoothPointError(
            f"{what}: maximum attained at {winners.size} places, norming point is not unique"
        )
    return int(winners[0])


def _norming_coords(space: SpaceSpec, g: np.ndarray) -> np.ndarray:
    """Unit vector of ``space`` at which ``g`` (measured in the dual) attains its norm.

    ``g`` must be non-zero. Sup leaves break ties with sign(0) = 0.
    """
    match space:
        case LpSpace(p=p):
            if p == 1.0:
                i = _unique_argmax(np.abs(g), "l1 norming point")
                out = np.zeros_like(g)
                out[i] = np.sign(g[i])
                return out
            q = conjugate_exponent(p)
            scaled = g / float(norm_array(LpSpace(p=q, dim=g.size), g))
            out = np.sign(scaled) * np.abs(scaled) ** (q - 1.0)
            return out / float(norm_array(space, out))
        case SupSpace():
            return np.sign(g)

    dual = dual_space(space)
    offsets = component_offsets(space)
    components = _components(space)
    block_norms = np.array(
        [
            float(norm_array(dual_space(c), g[offsets[i] : offsets[i + 1]]))
            for i, c in enumerate(components)
        ]
    )
    out = np.zeros_like(g)

    match space:
        case L1Sum():
            i = _unique_argmax(block_norms, "l1-sum norming point")
            out[offsets[i] : offsets[i + 1]] = _norming_coords(
                components[i], g[offsets[i] : offsets[i + 1]]
            )
            return out
        case C0Sum():
            weights = np.ones_like(block_norms)
        case LpSum(p=p):
            q = conjugate_exponent(p)
            total = float(norm_array(LpSpace(p=q, dim=block_norms.size), block_norms))
            weights = (block_norms / total) ** (q - 1.0)
        case _:
            raise UnsupportedSpaceError(f"No norming points for {space!r} (dual {dual!r})")

    for i, c in enumerate(components):
        if block_norms[i] > 0.0:
            out[offsets[i] : offsets[i + 1]] = weights[i] * _norming_coords(
                c, g[offsets[i] : offsets[i + 1]]
            )
    return out


def norming_point(space: SpaceSpec, f: DualElement | ArrayLike) -> PrimalVector:
    """Unit x with <f, x> = |f|.

    Raises:
        ZeroFunctionalError: If f = 0
        NonSmoothPointError: If an l1 leaf or l1-sum has several maximal
            coordinates / blocks and the norming point is ambiguous
    """
    coords = _checked(space, f)
    if not np.any(coords):
        raise ZeroFunctionalError("the zero functional has no norming point")
    return PrimalVector(space, _norming_coords(space, coords))


def duality_map(space: SpaceSpec, x: PrimalVector | ArrayLike) -> DualElement:
    """Unit functional g with <g, x> = |x| (the duality map, normalized)."""
    coords = _checked(space, x)
    if not np.any(coords):
        raise ZeroFunctionalError("the zero vector has no norming functional")
    return DualElement(space, _norming_coords(dual_space(space), coords))


def random_directions(
    space: SpaceSpec, rng: np.random.Generator, count: int, *, dual: bool = False
) -> np.ndarray:
    """``count`` random unit vectors (rows), unit in the primal or dual norm."""
    raw = rng.standard_normal((count, space.total_dim))
    norms = dual_norm_array(space, raw) if dual else norm_array(space, raw)
    return raw / norms[:, None]
