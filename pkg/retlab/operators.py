"""Operators T: X -> C(K) for finite K, stored by their rows T*(delta_s)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import minimize

from retlab.core.errors import (
    DimensionMismatchError,
    EmptyKError,
    LabelCollisionError,
    NonSmoothPointError,
)
from retlab.core.models import SpaceSpec, parse_space
from retlab.spaces import DualElement, PrimalVector, dual_norm_array, norm_array, norming_point


@dataclass(frozen=True, eq=False)
class OperatorIntoC0:
    """T with (Tx)(s) = <row(s), x> for every point s of K.

    Attributes:
        domain: Primal space X
        points: Labels of K, unique
        rows: (|K|, dim X) array, read-only; row i is T*(delta_(points[i]))
    """

    domain: SpaceSpec
    points: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        points = tuple(str(p) for p in self.points)
        if len(set(points)) != len(points):
            raise LabelCollisionError("operator points must be unique")
        rows = np.array(self.rows, dtype=float)
        if rows.size != len(points) * self.domain.total_dim:
            raise DimensionMismatchError(
                f"{rows.size} row entries for {len(points)} points of a "
                f"{self.domain.total_dim}-dimensional domain"
            )
        rows = rows.reshape(len(points), self.domain.total_dim)
        rows.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(
        cls, domain: SpaceSpec, rows: ArrayLike, points: list[str] | tuple[str, ...] | None = None
    ) -> OperatorIntoC0:
        """Build from a row array; points default to "1", "2", ..."""
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"rows must be a 2-D array, got shape {arr.shape}")
        labels = tuple(points) if points is not None else tuple(str(i + 1) for i in range(arr.shape[0]))
        return cls(domain, labels, arr)

    def index(self, label: str) -> int:
        try:
            return self.points.index(str(label))
        except ValueError as e:
            raise KeyError(f"unknown point {label!r}") from e

    def row(self, label: str) -> DualElement:
        return DualElement(self.domain, self.rows[self.index(label)])

    def apply(self, x: PrimalVector | ArrayLike) -> np.ndarray:
        """Tx as the vector ((Tx)(s))_s."""
        coords = x.coords if isinstance(x, PrimalVector) else np.asarray(x, dtype=float)
        if coords.shape[-1] != self.domain.total_dim:
            raise DimensionMismatchError(f"expected {self.domain.total_dim} coordinates")
        return self.rows @ coords

    @property
    def row_norms(self) -> np.ndarray:
        if not self.points:
            return np.zeros(0)
        return dual_norm_array(self.domain, self.rows)

    def scaled(self, factor: float) -> OperatorIntoC0:
        return OperatorIntoC0(self.domain, self.points, self.rows * factor)

    def to_dict(self) -> dict[str, Any]:
        return {
            "domain": self.domain.model_dump(mode="json"),
            "points": list(self.points),
            "rows": self.rows.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> OperatorIntoC0:
        domain = parse_space(data["domain"])
        rows = np.asarray(data["rows"], dtype=float).reshape(-1, domain.total_dim)
        return cls.from_rows(domain, rows, data["points"])


def operator_norm(T: OperatorIntoC0) -> float:
    """|T| = max over s of |row(s)|.

    Raises:
        EmptyKError: If K has no points
    """
    if not T.points:
        raise EmptyKError("operator into C(K) with empty K")
    return float(np.max(T.row_norms))


def sup_norm_image(T: OperatorIntoC0, x: PrimalVector | ArrayLike) -> float:
    """|Tx| in C(K)."""
    return float(np.max(np.abs(T.apply(x))))


def is_norm_attaining(T: OperatorIntoC0, tol: float = 1e-9) -> tuple[bool, PrimalVector | None]:
    """Whether some unit x has |Tx| = |T| within ``tol``, with such an x.

    Norming points of maximal rows are tried first, then a local search.
    """
    size = operator_norm(T)
    space = T.domain
    if size == 0.0:
        witness = np.zeros(space.total_dim)
        witness[0] = 1.0
        witness /= float(norm_array(space, witness))
        return True, PrimalVector(space, witness)

    for i in np.flatnonzero(T.row_norms >= size - tol):
        try:
            x = norming_point(space, T.rows[i])
        except NonSmoothPointError:
            continue
        if sup_norm_image(T, x) >= size - tol:
            return True, x

    def objective(z: np.ndarray) -> float:
        n = float(norm_array(space, z))
        return 0.0 if n == 0.0 else -float(np.max(np.abs(T.rows @ z))) / n

    start = T.rows[int(np.argmax(T.row_norms))]
    result = minimize(objective, start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
    z = np.asarray(result.x, dtype=float)
    n = float(norm_array(space, z))
    if n > 0.0 and -result.fun >= size - tol:
        return True, PrimalVector(space, z / n)
    return False, None
