"""Tests for the retraction factory API (create_retraction function).

Verifies the factory instantiates the right family for each kind, validates
kinds and required arguments, passes policy and logger through, and rebuilds
handles from their JSON documents.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from retlab import (
    C0ChainRetraction,
    ComponentRetraction,
    L1SumRetraction,
    LabLogger,
    NumericsPolicy,
    RadialRetraction,
    RetractionHandle,
    RetractionKind,
    TransferredRetraction,
    TruncationRetraction,
    create_retraction,
    public_kinds,
    retraction_from_dict,
)
from retlab.core.models import SupSpace
from retlab.spaces import DualElement


class TestCreateRetraction:
    """Test create_retraction() for every family."""

    def test_radial(self, l2) -> None:
        handle = create_retraction("radial", l2)
        assert isinstance(handle, RadialRetraction)
        assert isinstance(handle, RetractionHandle)

    def test_truncation_from_enum(self, l2) -> None:
        handle = create_retraction(RetractionKind.TRUNCATION, l2)
        assert isinstance(handle, TruncationRetraction)
        assert handle.kind is RetractionKind.TRUNCATION

    def test_l1sum(self, l1_of_sups) -> None:
        children = [create_retraction("truncation", c) for c in l1_of_sups.components]
        handle = create_retraction("l1sum", l1_of_sups, children=children)
        assert isinstance(handle, L1SumRetraction)

    def test_c0chain_with_options(self, c0_l2_pair) -> None:
        handle = create_retraction("c0chain", c0_l2_pair, extension_method="iterative")
        assert isinstance(handle, C0ChainRetraction)
        assert handle.extension_method == "iterative"

    def test_transferred(self) -> None:
        child = create_retraction("radial", SupSpace(dim=3))
        handle = create_retraction("transferred", child=child, labels=["a", "b"])
        assert isinstance(handle, TransferredRetraction)
        assert handle.space == SupSpace(dim=2)

    def test_component(self, l1_of_sups) -> None:
        children = [create_retraction("truncation", c) for c in l1_of_sups.components]
        parent = create_retraction("l1sum", l1_of_sups, children=children)
        handle = create_retraction("component", parent=parent, component=1)
        assert isinstance(handle, ComponentRetraction)
        assert handle.space == SupSpace(dim=2)

    def test_policy_and_logger_pass_through(self, l2) -> None:
        policy = NumericsPolicy(bisection_xtol=1e-10)
        logger = LabLogger("factory-test")
        handle = create_retraction("truncation", l2, policy=policy, logger=logger)
        assert handle.policy is policy
        assert handle.logger is logger

    def test_default_policy(self, l2) -> None:
        handle = create_retraction("radial", l2)
        assert isinstance(handle.policy, NumericsPolicy)
        assert handle.policy.bisection_xtol == 1e-12


class TestCreateRetractionErrors:
    """Test create_retraction() argument validation."""

    def test_unknown_kind(self, l2) -> None:
        with pytest.raises(ValueError, match="Invalid retraction kind"):
            create_retraction("spiral", l2)

    @pytest.mark.parametrize("kind", ["radial", "truncation", "l1sum", "c0chain"])
    def test_space_required(self, kind) -> None:
        with pytest.raises(ValueError, match="needs a space"):
            create_retraction(kind)

    def test_l1sum_needs_children(self, l1_of_sups) -> None:
        with pytest.raises(ValueError, match="children"):
            create_retraction("l1sum", l1_of_sups)

    def test_transferred_needs_child(self) -> None:
        with pytest.raises(ValueError, match="child"):
            create_retraction("transferred")

    def test_component_needs_parent(self) -> None:
        with pytest.raises(ValueError, match="parent"):
            create_retraction("component", component=0)


class TestRetractionFromDict:
    """Test rebuilding handles from to_dict() documents."""

    def _same_action(self, a: RetractionHandle, b: RetractionHandle, rng: np.random.Generator) -> None:
        for _ in range(10):
            f = DualElement(a.space, rng.standard_normal(a.space.total_dim) * 2)
            assert np.allclose(a.apply(f).coords, b.apply(f).coords)

    def test_leaf_handles(self, l2, rng) -> None:
        for kind in ("radial", "truncation"):
            handle = create_retraction(kind, l2)
            rebuilt = retraction_from_dict(handle.to_dict())
            assert type(rebuilt) is type(handle)
            self._same_action(handle, rebuilt, rng)

    def test_nested_document_through_json(self, l1_of_sups, rng) -> None:
        children = [create_retraction("truncation", c) for c in l1_of_sups.components]
        parent = create_retraction("l1sum", l1_of_sups, children=children)
        handle = create_retraction("component", parent=parent, component=0)
        document = json.loads(json.dumps(handle.to_dict()))
        rebuilt = retraction_from_dict(document)
        assert isinstance(rebuilt, ComponentRetraction)
        assert isinstance(rebuilt.parent, L1SumRetraction)
        self._same_action(handle, rebuilt, rng)

    def test_transferred_keeps_labels(self) -> None:
        child = create_retraction("truncation", SupSpace(dim=3))
        handle = create_retraction("transferred", child=child, labels=["p", "q"])
        rebuilt = retraction_from_dict(handle.to_dict())
        assert rebuilt.labels == ("p", "q")

    def test_chain_keeps_extension_method(self, c0_l2_pair) -> None:
        handle = create_retraction("c0chain", c0_l2_pair, extension_method="iterative")
        assert retraction_from_dict(handle.to_dict()).extension_method == "iterative"


def test_public_kinds() -> None:
    """Every family except component can be requested from a config."""
    assert public_kinds() == ["radial", "truncation", "l1sum", "c0chain", "transferred"]
