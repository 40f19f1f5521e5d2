"""
Experiment configuration.

ExperimentConfig is loaded from a JSON file; command-line flags override
individual fields. Every validation failure surfaces as ConfigInvalidError.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from retlab.core.errors import ConfigInvalidError
from retlab.core.factory import public_kinds
from retlab.core.models import SpaceSpec


class ExperimentKind(str, Enum):
    """Experiments the runner knows, one per subcommand."""

    MODULUS = "modulus"
    CONTINUITY = "retraction-continuity"
    BPB = "bpb"
    PERTURBATION = "perturbation"
    LEMMA = "convex-lemma"


SUBCOMMANDS: dict[str, ExperimentKind] = {
    "modulus": ExperimentKind.MODULUS,
    "continuity": ExperimentKind.CONTINUITY,
    "bpb": ExperimentKind.BPB,
    "perturb": ExperimentKind.PERTURBATION,
    "lemma": ExperimentKind.LEMMA,
}


class ExperimentConfig(BaseModel):
    """One experiment run.

    Attributes:
        experiment: Which experiment to run
        space: Primal space (not used by convex-lemma)
        grid: t or epsilon values, strictly increasing in (0, 1]
        samples: Sampled pairs per t, or instances for bpb / perturbation / lemma
        seed: Seed of every random draw
        output_path: CSV destination; the config sidecar goes next to it
        retraction: Handle family for retraction-continuity
        workers: Thread pool size
        points: |K| for perturbation, series length for convex-lemma
        policy_path: Numerics policy TOML
    """

    model_config = ConfigDict(extra="forbid")

    experiment: ExperimentKind
    space: SpaceSpec | None = None
    grid: tuple[float, ...] = Field(min_length=1)
    samples: int = Field(default=1000, ge=1)
    seed: int = 0
    output_path: str = "results/experiment.csv"
    retraction: str = "truncation"
    workers: int = Field(default=1, ge=1)
    points: int = Field(default=4, ge=1)
    policy_path: str = "config/numerics.toml"

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            raise ConfigInvalidError(f"Invalid experiment config: {e}") from e

    @classmethod
    def model_validate(  # type: ignore[override]
        cls,
        obj: Any,
        *,
        strict: bool | None = None,
        from_attributes: bool | None = None,
        context: Any | None = None,
    ) -> ExperimentConfig:
        try:
            return super().model_validate(
                obj, strict=strict, from_attributes=from_attributes, context=context
            )
        except ValidationError as e:
            raise ConfigInvalidError(f"Invalid experiment config: {e}") from e

    @field_validator("retraction")
    @classmethod
    def validate_retraction(cls, v: str) -> str:
        if v not in public_kinds():
            raise ValueError(f"retraction must be one of {public_kinds()}, got {v!r}")
        return v

    @model_validator(mode="after")
    def validate_grid(self) -> ExperimentConfig:
        """Grid strictly increasing in (0, 1]; epsilon < 1 where the theorems need it."""
        grid = np.asarray(self.grid, dtype=float)
        if grid[0] <= 0.0 or grid[-1] > 1.0 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing in (0, 1]")
        if self.experiment in (ExperimentKind.BPB, ExperimentKind.PERTURBATION) and grid[-1] >= 1.0:
            raise ValueError(f"{self.experiment.value} needs epsilon < 1")
        if self.experiment is not ExperimentKind.LEMMA and self.space is None:
            raise ValueError(f"{self.experiment.value} needs a space")
        return self

    @classmethod
    def from_file(cls, path: Path | str, **overrides: Any) -> ExperimentConfig:
        """Load a JSON config; non-None ``overrides`` replace file values."""
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigInvalidError(f"Configuration file not found: {config_path}")
        try:
            data = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigInvalidError(f"Configuration file is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigInvalidError("Configuration file must hold a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)

    def sidecar_path(self) -> Path:
        return Path(f"{self.output_path}.config.json")
