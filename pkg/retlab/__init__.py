"""retlab - uniformly continuous retractions onto dual unit balls.

This package builds and checks retractions of a dual space X* onto its unit
ball for finite-dimensional models of classical Banach spaces, and uses them
to produce Bishop-Phelps-Bollobas perturbations of operators into C(K).

Architecture
------------
1. **Core Layer** (core/): Space specs, numerics policy, errors, logging
   - SpaceSpec: Pydantic-validated tree of lp, sup, l1-, c0- and lp-sums
   - NumericsPolicy: Every tolerance and sample count, loaded from TOML
   - RetractionHandle: Abstract retraction with its claimed modulus
   - LabLogger: Structured structlog events for builds, searches and runs

2. **Geometry Layer** (spaces.py, moduli.py): Norms, duality, moduli
   - Norms, dual norms, pairings and norming points for every space kind
   - Modulus of uniform monotonicity M, its inverse, modulus of convexity

3. **Retraction Layer** (retractions/, compactify.py): Retraction families
   - RadialRetraction: f / |f|
   - TruncationRetraction: Crossing-index truncation on lattices
   - L1SumRetraction / ComponentRetraction: Sums and their components
   - C0ChainRetraction: Subspace-chain retraction on c0-sums
   - TransferredRetraction: One-point compactification transfer

4. **Perturbation Layer** (operators.py, bpb.py): Operators into C(K)
   - bpb_point: Norming pairs near an almost-norming pair
   - perturb_compact / perturb_general: Norm-attaining perturbations

Quick Start
-----------
>>> from retlab import LpSpace, DualElement, create_retraction
>>> space = LpSpace(p=2, dim=2)
>>> handle = create_retraction("truncation", space)
>>> handle.apply(DualElement(space, [1.0, 1.0])).coords
array([1., 0.])
"""

from __future__ import annotations

from .bpb import (
    BPBResult,
    ConvexSeriesResult,
    PerturbationCertificate,
    bpb_point,
    convex_series_bound,
    perturb_compact,
    perturb_general,
)
from .compactify import FiniteMeasure, TransferredRetraction, extend_measure, transfer_retract
from .core import (
    C0Sum,
    CurveKind,
    L1Sum,
    LabLogger,
    LpSpace,
    LpSum,
    ModulusCurve,
    NumericsPolicy,
    RetractionKind,
    RetractionLabError,
    SpaceSpec,
    SupSpace,
    configure_structlog,
    parse_space,
)
from .core.base import RetractionHandle
from .core.factory import create_retraction, public_kinds, retraction_from_dict
from .moduli import (
    common_convexity_floor,
    modulus_convexity,
    modulus_monotonicity,
    monotonicity_inverse,
)
from .operators import OperatorIntoC0, is_norm_attaining, operator_norm
from .policies import DEFAULT_POLICY, default_policy, load_policy
from .retractions import (
    C0ChainRetraction,
    ComponentRetraction,
    L1SumRetraction,
    RadialRetraction,
    SubspaceChain,
    TruncationRetraction,
    hahn_banach_min_extension,
    omega_estimate,
)
from .spaces import (
    DualElement,
    PrimalVector,
    dual_norm,
    dual_space,
    duality_map,
    is_smooth,
    norm,
    norming_point,
    pair,
    truncate,
)

__all__ = [
    "DEFAULT_POLICY",
    "BPBResult",
    "C0ChainRetraction",
    "C0Sum",
    "ComponentRetraction",
    "ConvexSeriesResult",
    "CurveKind",
    "DualElement",
    "FiniteMeasure",
    "L1Sum",
    "L1SumRetraction",
    "LabLogger",
    "LpSpace",
    "LpSum",
    "ModulusCurve",
    "NumericsPolicy",
    "OperatorIntoC0",
    "PerturbationCertificate",
    "PrimalVector",
    "RadialRetraction",
    "RetractionHandle",
    "RetractionKind",
    "RetractionLabError",
    "SpaceSpec",
    "SubspaceChain",
    "SupSpace",
    "TransferredRetraction",
    "TruncationRetraction",
    "bpb_point",
    "common_convexity_floor",
    "configure_structlog",
    "convex_series_bound",
    "create_retraction",
    "default_policy",
    "dual_norm",
    "dual_space",
    "duality_map",
    "extend_measure",
    "hahn_banach_min_extension",
    "is_norm_attaining",
    "is_smooth",
    "load_policy",
    "modulus_convexity",
    "modulus_monotonicity",
    "monotonicity_inverse",
    "norm",
    "norming_point",
    "omega_estimate",
    "operator_norm",
    "pair",
    "parse_space",
    "perturb_compact",
    "perturb_general",
    "public_kinds",
    "retraction_from_dict",
    "transfer_retract",
    "truncate",
]
