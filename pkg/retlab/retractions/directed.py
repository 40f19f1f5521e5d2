"""Directed sequences x_k -> x for checking phi(x_k)(j) -> phi(x)(j) coordinatewise.

Weak-* continuity of the truncation retraction splits into cases by how the
crossing index of x_k relates to that of x. Each case below builds a limit x
and a sequence approaching it so that the case is actually exercised.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from retlab.core.base import RetractionHandle
from retlab.core.errors import DimensionMismatchError, UnsupportedSpaceError
from retlab.core.models import SpaceSpec
from retlab.spaces import DualElement, dual_norm_array

DEFAULT_STEPS = tuple(np.geomspace(10.0, 1e12, 12).tolist())


class DirectedCase(NamedTuple):
    name: str
    limit: DualElement
    sequence: tuple[DualElement, ...]


class LimitVerdict(NamedTuple):
    name: str
    errors: tuple[float, ...]
    passed: bool


def _normalized_prefix(space: SpaceSpec, coords: np.ndarray, length: int) -> np.ndarray:
    """Scale the first ``length`` coordinates so that their prefix has dual norm 1."""
    prefix = np.zeros_like(coords)
    prefix[:length] = coords[:length]
    out = np.array(coords)
    out[:length] /= float(dual_norm_array(space, prefix))
    return out


def directed_cases(space: SpaceSpec, steps: tuple[float, ...] = DEFAULT_STEPS) -> list[DirectedCase]:
    """The four crossing-index cases on the dual of ``space`` (needs dim >= 3).

    stable_crossing: n(x_k) = n(x) for large k
    shifting_crossing: |P_2* x| = 1 and x_k approaches from below, so n(x_k) = n(x) + 1
    t_to_one: n(x_k) = n(x) with t_k -> 1
    inside_ball: |x| = 1 and every x_k lies outside the ball
    """
    dim = space.total_dim
    if dim < 3:
        raise UnsupportedSpaceError(f"directed cases need dim >= 3, got {dim}")
    ones = np.ones(dim)
    alternating = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0) / dim

    def dual(coords: np.ndarray) -> DualElement:
        return DualElement(space, coords)

    cases = []

    stable = 1.5 * ones / float(dual_norm_array(space, ones))
    cases.append(
        DirectedCase(
            "stable_crossing",
            dual(stable),
            tuple(dual(stable + alternating / k) for k in steps),
        )
    )

    shifting = _normalized_prefix(space, ones, 2)
    seq = []
    for k in steps:
        c = np.array(shifting)
        c[1] *= 1.0 - 1.0 / k
        seq.append(dual(c))
    cases.append(DirectedCase("shifting_crossing", dual(shifting), tuple(seq)))

    boundary = _normalized_prefix(space, ones, dim - 1)
    seq = []
    for k in steps:
        c = np.array(boundary)
        c[dim - 2] *= 1.0 + 1.0 / k
        seq.append(dual(c))
    cases.append(DirectedCase("t_to_one", dual(boundary), tuple(seq)))

    unit = ones / float(dual_norm_array(space, ones))
    cases.append(
        DirectedCase(
            "inside_ball",
            dual(unit),
            tuple(dual((1.0 + 1.0 / k) * unit) for k in steps),
        )
    )
    return cases


def check_coordinatewise_limit(
    handle: RetractionHandle, case: DirectedCase, tol: float = 1e-3
) -> LimitVerdict:
    """max_j |phi(x_k)(j) - phi(x)(j)| along the sequence; passes if it ends below tol
    and does not grow."""
    if case.limit.space != handle.space:
        raise DimensionMismatchError(f"case lives on {case.limit.space!r}, handle on {handle.space!r}")
    target = handle.apply(case.limit).coords
    errors = tuple(
        float(np.max(np.abs(handle.apply(x).coords - target))) for x in case.sequence
    )
    passed = errors[-1] <= tol and errors[-1] <= errors[0] + tol
    return LimitVerdict(case.name, errors, passed)
