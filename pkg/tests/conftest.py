"""Shared pytest fixtures for all tests."""

from __future__ import annotations

from typing import Any

import numpy as np
import pytest
import structlog

from retlab.core.logging import LabLogger
from retlab.core.models import C0Sum, L1Sum, LpSpace, NumericsPolicy, SupSpace
from retlab.policies import default_policy


class StructlogCapture:
    """Helper to capture structlog events."""

    def __init__(self) -> None:
        self.events: list[dict[str, Any]] = []

    def __call__(self, logger: Any, method_name: str, event_dict: dict[str, Any]) -> dict[str, Any]:
        """Capture event dict (structlog processor signature)."""
        self.events.append(event_dict.copy())
        return event_dict

    def named(self, event: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e.get("event") == event]


@pytest.fixture(autouse=True)
def _reset_structlog():
    """Undo per-test structlog configuration."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def log_capture() -> StructlogCapture:
    """Fixture providing structlog event capture."""
    return StructlogCapture()


@pytest.fixture
def capturing_logger(log_capture: StructlogCapture) -> LabLogger:
    """LabLogger whose events land in ``log_capture``."""
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            log_capture,
            structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.BoundLogger,
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(),
        cache_logger_on_first_use=False,
    )
    return LabLogger(structlog.get_logger("test_retlab"))


@pytest.fixture
def policy() -> NumericsPolicy:
    """Default numerics policy."""
    return default_policy()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(20240601)


@pytest.fixture
def l2() -> LpSpace:
    return LpSpace(p=2.0, dim=2)


@pytest.fixture
def l2_3() -> LpSpace:
    return LpSpace(p=2.0, dim=3)


@pytest.fixture
def sup3() -> SupSpace:
    """c_0^3, whose dual is l_1^3."""
    return SupSpace(dim=3)


@pytest.fixture
def c0_l2_pair() -> C0Sum:
    """c0-sum of two Euclidean planes; its dual is the l1-sum of two planes."""
    return C0Sum(components=(LpSpace(p=2.0, dim=2), LpSpace(p=2.0, dim=2)))


@pytest.fixture
def l1_of_sups() -> L1Sum:
    """l1-sum of c_0^3 and c_0^2; its dual is the sup-sum of l_1^3 and l_1^2."""
    return L1Sum(components=(SupSpace(dim=3), SupSpace(dim=2)))
