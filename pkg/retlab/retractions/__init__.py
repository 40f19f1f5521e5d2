"""Retraction families on dual unit balls and their empirical checks."""

from __future__ import annotations

from .chain import (
    C0ChainRetraction,
    SubspaceChain,
    c0_sum_retract,
    chain_index,
    chain_position,
    hahn_banach_min_extension,
)
from .continuity import nearest_point_defect, omega_estimate
from .directed import DirectedCase, LimitVerdict, check_coordinatewise_limit, directed_cases
from .radial import RadialRetraction, radial_retract
from .sums import ComponentRetraction, L1SumRetraction, l1_sum_retract
from .truncation import Crossing, TruncationRetraction, partial_sum_norms, truncation_retract

__all__ = [
    "C0ChainRetraction",
    "ComponentRetraction",
    "Crossing",
    "DirectedCase",
    "L1SumRetraction",
    "LimitVerdict",
    "RadialRetraction",
    "SubspaceChain",
    "TruncationRetraction",
    "c0_sum_retract",
    "chain_index",
    "chain_position",
    "check_coordinatewise_limit",
    "directed_cases",
    "hahn_banach_min_extension",
    "l1_sum_retract",
    "nearest_point_defect",
    "omega_estimate",
    "partial_sum_norms",
    "radial_retract",
    "truncation_retract",
]
