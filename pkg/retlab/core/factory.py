"""Factory for retraction handles and their JSON documents.

create_retraction() maps RetractionKind values to concrete handles;
retraction_from_dict() rebuilds a handle from the document produced by
RetractionHandle.to_dict().
"""

from __future__ import annotations

from typing import Any

from retlab.compactify import TransferredRetraction
from retlab.core.base import RetractionHandle
from retlab.core.logging import LabLogger
from retlab.core.models import NumericsPolicy, RetractionKind, SpaceSpec, parse_space
from retlab.retractions import (
    C0ChainRetraction,
    ComponentRetraction,
    L1SumRetraction,
    RadialRetraction,
    TruncationRetraction,
)


def create_retraction(
    kind: RetractionKind | str,
    space: SpaceSpec | None = None,
    *,
    children: list[RetractionHandle] | None = None,
    child: RetractionHandle | None = None,
    labels: list[str] | None = None,
    parent: RetractionHandle | None = None,
    component: int | None = None,
    policy: NumericsPolicy | None = None,
    logger: LabLogger | None = None,
    **kwargs: Any,
) -> RetractionHandle:
    """Create a retraction handle of the requested family.

    Args:
        kind: RetractionKind value (or its string form)
        space: Primal space; required for radial, truncation, l1sum and c0chain
        children: Component handles for l1sum
        child: Handle on C(K)* for transferred
        labels: Point labels of L for transferred
        parent: Sum handle for component
        component: 0-based component index for component
        policy: Optional NumericsPolicy. If None, uses the default policy.
        logger: Optional LabLogger
        **kwargs: Family-specific options (``extension_method`` for c0chain)

    Returns:
        RetractionHandle: The concrete handle

    Raises:
        ValueError: If kind is unknown or a required argument is missing
    """
    try:
        kind = RetractionKind(kind)
    except ValueError as e:
        raise ValueError(
            f"Invalid retraction kind: {kind}. "
            f"Must be one of {[k.value for k in RetractionKind]}."
        ) from e

    needs_space = (
        RetractionKind.RADIAL,
        RetractionKind.TRUNCATION,
        RetractionKind.L1SUM,
        RetractionKind.C0CHAIN,
    )
    if kind in needs_space and space is None:
        raise ValueError(f"{kind.value} retraction needs a space")

    match kind:
        case RetractionKind.RADIAL:
            return RadialRetraction(space, policy, logger)  # type: ignore[arg-type]
        case RetractionKind.TRUNCATION:
            return TruncationRetraction(space, policy, logger)  # type: ignore[arg-type]
        case RetractionKind.L1SUM:
            if children is None:
                raise ValueError("l1sum retraction needs children")
            return L1SumRetraction(space, children, policy, logger)  # type: ignore[arg-type]
        case RetractionKind.C0CHAIN:
            return C0ChainRetraction(space, policy, logger, **kwargs)  # type: ignore[arg-type]
        case RetractionKind.TRANSFERRED:
            if child is None:
                raise ValueError("transferred retraction needs a child handle")
            return TransferredRetraction(child, labels, policy, logger)
        case RetractionKind.COMPONENT:
            if parent is None or component is None:
                raise ValueError("component retraction needs a parent and a component index")
            return ComponentRetraction(parent, component, policy, logger)
    raise ValueError(f"Invalid retraction kind: {kind}")


def retraction_from_dict(
    document: dict[str, Any],
    policy: NumericsPolicy | None = None,
    logger: LabLogger | None = None,
) -> RetractionHandle:
    """Rebuild a handle from RetractionHandle.to_dict() output."""
    kind = RetractionKind(document["kind"])
    space = parse_space(document["space"]) if "space" in document else None
    match kind:
        case RetractionKind.L1SUM:
            children = [retraction_from_dict(c, policy, logger) for c in document["children"]]
            return create_retraction(kind, space, children=children, policy=policy, logger=logger)
        case RetractionKind.TRANSFERRED:
            child = retraction_from_dict(document["child"], policy, logger)
            return create_retraction(
                kind, child=child, labels=document.get("labels"), policy=policy, logger=logger
            )
        case RetractionKind.COMPONENT:
            parent = retraction_from_dict(document["parent"], policy, logger)
            return create_retraction(
                kind, parent=parent, component=int(document["index"]), policy=policy, logger=logger
            )
        case RetractionKind.C0CHAIN:
            return create_retraction(
                kind,
                space,
                policy=policy,
                logger=logger,
                extension_method=document.get("extension_method", "closed_form"),
            )
    return create_retraction(kind, space, policy=policy, logger=logger)


def public_kinds() -> list[str]:
    """Kinds that can be requested from experiment configs."""
    return [k.value for k in RetractionKind if k is not RetractionKind.COMPONENT]
