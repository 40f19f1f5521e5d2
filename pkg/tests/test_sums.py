"""Tests for L1SumRetraction and ComponentRetraction."""

from __future__ import annotations

import pytest

from retlab.core.errors import ComponentMismatchError, PreconditionModulusError, UnsupportedSpaceError
from retlab.core.models import C0Sum, L1Sum, LpSpace, LpSum, NumericsPolicy, SupSpace
from retlab.retractions import (
    C0ChainRetraction,
    ComponentRetraction,
    L1SumRetraction,
    RadialRetraction,
    TruncationRetraction,
    l1_sum_retract,
)
from retlab.spaces import DualElement, dual_norm


@pytest.fixture
def l1_handle(l1_of_sups) -> L1SumRetraction:
    children = [TruncationRetraction(c) for c in l1_of_sups.components]
    return L1SumRetraction(l1_of_sups, children)


class TestL1SumRetraction:
    """Test componentwise retraction on the dual of an l1-sum."""

    def test_retracts_each_block(self, l1_of_sups, l1_handle):
        f = DualElement(l1_of_sups, [0.6, 0.8, 0.5, 0.2, 0.1])
        assert l1_handle.apply(f).coords == pytest.approx([0.6, 0.4, 0.0, 0.2, 0.1])

    def test_function_form(self, l1_of_sups, l1_handle):
        f = DualElement(l1_of_sups, [0.6, 0.8, 0.5, 0.2, 0.1])
        assert l1_sum_retract(l1_handle.children, f).coords == pytest.approx([0.6, 0.4, 0.0, 0.2, 0.1])

    def test_image_in_sup_sum_ball(self, l1_of_sups, l1_handle, rng):
        for _ in range(50):
            f = DualElement(l1_of_sups, rng.standard_normal(5) * 2)
            assert dual_norm(l1_of_sups, l1_handle.apply(f)) <= 1.0 + 1e-9

    def test_modulus_is_sup_of_children(self, l1_handle):
        """Both children retract onto l_1 balls, so the bound is 2t."""
        assert l1_handle.modulus_bound(0.1) == pytest.approx(0.2)
        assert l1_handle.sup_curve[0] == pytest.approx(0.02)

    def test_nearest_point_f(self, l1_handle):
        assert l1_handle.nearest_point_f(0.5) == pytest.approx(0.0)

    def test_mixed_children(self):
        space = L1Sum(components=(LpSpace(p=2, dim=2), SupSpace(dim=2)))
        handle = L1SumRetraction(space, [TruncationRetraction(c) for c in space.components])
        assert handle.modulus_bound(0.1) == pytest.approx(max(0.2, 2 * (1.21 - 1) ** 0.5))

    def test_radial_child_claims_nothing(self, l1_of_sups):
        children = [RadialRetraction(c) for c in l1_of_sups.components]
        with pytest.raises(PreconditionModulusError):
            L1SumRetraction(l1_of_sups, children)

    def test_child_count(self, l1_of_sups):
        with pytest.raises(ComponentMismatchError):
            L1SumRetraction(l1_of_sups, [TruncationRetraction(SupSpace(dim=3))])

    def test_child_space(self, l1_of_sups):
        children = [TruncationRetraction(SupSpace(dim=2)), TruncationRetraction(SupSpace(dim=2))]
        with pytest.raises(ComponentMismatchError):
            L1SumRetraction(l1_of_sups, children)

    def test_needs_l1sum(self, c0_l2_pair):
        children = [TruncationRetraction(c) for c in c0_l2_pair.components]
        with pytest.raises(UnsupportedSpaceError):
            L1SumRetraction(c0_l2_pair, children)

    def test_to_dict_nests_children(self, l1_handle):
        data = l1_handle.to_dict()
        assert data["kind"] == "l1sum"
        assert [c["kind"] for c in data["children"]] == ["truncation", "truncation"]


class TestComponentRetraction:
    """Test restriction of a sum retraction to one component dual."""

    def test_restricts_l1sum_parent(self, l1_handle):
        handle = ComponentRetraction(l1_handle, 0)
        assert handle.space == SupSpace(dim=3)
        out = handle.apply(DualElement(SupSpace(dim=3), [0.6, 0.8, 0.5]))
        assert out.coords == pytest.approx([0.6, 0.4, 0.0])

    def test_restricts_chain_parent(self, c0_l2_pair):
        parent = C0ChainRetraction(c0_l2_pair)
        handle = ComponentRetraction(parent, 1)
        out = handle.apply(DualElement(LpSpace(p=2, dim=2), [3.0, 4.0]))
        assert dual_norm(handle.space, out) == pytest.approx(1.0, abs=1e-9)

    def test_inherits_certificates(self, l1_handle):
        handle = ComponentRetraction(l1_handle, 1)
        assert handle.modulus_bound(0.1) == l1_handle.modulus_bound(0.1)
        assert handle.nearest_point_f(0.1) == l1_handle.nearest_point_f(0.1)

    def test_index_out_of_range(self, l1_handle):
        with pytest.raises(ComponentMismatchError):
            ComponentRetraction(l1_handle, 2)

    def test_leaf_parent(self, l2):
        with pytest.raises(UnsupportedSpaceError):
            ComponentRetraction(TruncationRetraction(l2), 0)

    def test_to_dict(self, l1_handle):
        data = ComponentRetraction(l1_handle, 1).to_dict()
        assert data["kind"] == "component"
        assert data["index"] == 1
        assert data["parent"]["kind"] == "l1sum"

    def test_sup_sum_parent(self):
        space = C0Sum(components=(LpSpace(p=2, dim=1), LpSpace(p=2, dim=1)))
        parent = RadialRetraction(space)
        handle = ComponentRetraction(parent, 0)
        assert handle.apply(DualElement(LpSpace(p=2, dim=1), [2.0])).coords.tolist() == [1.0]

    def test_lp_sum_parent(self):
        space = LpSum(p=2, components=(LpSpace(p=2, dim=2), LpSpace(p=3, dim=2)))
        handle = ComponentRetraction(RadialRetraction(space), 0)
        assert handle.space == LpSpace(p=2, dim=2)
        out = handle.apply(DualElement(handle.space, [3.0, 4.0]))
        assert out.coords == pytest.approx([0.6, 0.8])

    def test_lp_sum_truncation_parent(self):
        space = LpSum(p=2, components=(LpSpace(p=2, dim=2), LpSpace(p=3, dim=2)))
        parent = TruncationRetraction(space, NumericsPolicy(grid_points=8, refine_iterations=2))
        handle = ComponentRetraction(parent, 1)
        assert handle.space == LpSpace(p=3, dim=2)
        out = handle.apply(DualElement(handle.space, [2.0, -5.0]))
        assert dual_norm(handle.space, out) <= 1.0 + 1e-9
        inside = DualElement(handle.space, [0.3, -0.2])
        assert handle.apply(inside).coords == pytest.approx([0.3, -0.2])
