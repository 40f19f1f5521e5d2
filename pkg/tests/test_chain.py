"""Tests for the subspace chain, minimum-norm extensions and the c0-sum retraction."""

from __future__ import annotations

import math

import numpy as np
import pytest

from retlab.core.errors import (
    ComponentMismatchError,
    DimensionMismatchError,
    IndexOutOfRangeError,
    NonUniqueExtensionError,
    PreconditionModulusError,
    SpaceSpecError,
    UnsupportedSpaceError,
)
from retlab.core.models import C0Sum, L1Sum, LpSpace, SupSpace
from retlab.retractions import (
    C0ChainRetraction,
    SubspaceChain,
    c0_sum_retract,
    chain_index,
    chain_position,
    hahn_banach_min_extension,
)
from retlab.spaces import DualElement, dual_norm, random_directions


class TestChainIndex:
    """Test the diagonal enumeration of (component, coordinate) pairs."""

    @pytest.mark.parametrize(("i", "j", "k"), [(1, 1, 1), (2, 1, 2), (1, 2, 3), (3, 1, 4), (1, 3, 6)])
    def test_values(self, i, j, k):
        assert chain_index(i, j) == k

    def test_bijective_prefix(self):
        seen = {chain_index(i, j) for i in range(1, 12) for j in range(1, 12) if i + j <= 12}
        assert seen == set(range(1, 67))

    def test_inverse(self):
        for k in range(1, 200):
            assert chain_index(*chain_position(k)) == k

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            chain_index(0, 1)
        with pytest.raises(ValueError):
            chain_position(0)


class TestSubspaceChain:
    """Test the chain of coordinate subspaces."""

    def test_order_two_planes(self):
        chain = SubspaceChain((2, 2))
        assert chain.order.tolist() == [0, 2, 1, 3]
        assert chain.steps == ((1, 1), (2, 1), (1, 2), (2, 2))

    def test_uneven_components(self):
        """Steps past the dimension of a component are skipped."""
        chain = SubspaceChain((1, 3))
        assert chain.steps == ((1, 1), (2, 1), (2, 2), (2, 3))
        assert chain.order.tolist() == [0, 1, 2, 3]

    def test_subspaces_nested(self):
        chain = SubspaceChain((2, 3, 1))
        for k in range(len(chain)):
            assert chain.subspace(k) < chain.subspace(k + 1)
        assert chain.subspace(0) == frozenset()
        assert chain.subspace(len(chain)) == frozenset(range(6))

    def test_subspace_out_of_range(self):
        with pytest.raises(IndexOutOfRangeError):
            SubspaceChain((2, 2)).subspace(5)

    def test_masks(self):
        masks = SubspaceChain((2, 2)).masks()
        assert masks[1].tolist() == [1.0, 0.0, 1.0, 0.0]
        assert masks[-1].tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_from_space(self, c0_l2_pair):
        assert SubspaceChain.from_space(c0_l2_pair).component_dims == (2, 2)

    def test_invalid_dims(self):
        with pytest.raises(SpaceSpecError):
            SubspaceChain((2, 0))


class TestHahnBanachExtension:
    """Test the norm-preserving extension from coordinate subspaces."""

    def test_euclidean_zero_extension(self):
        h = hahn_banach_min_extension(LpSpace(p=2, dim=2), {0}, [1.0])
        assert h.coords.tolist() == [1.0, 0.0]

    def test_norm_preserved(self, c0_l2_pair):
        h = hahn_banach_min_extension(c0_l2_pair, [0, 2], [0.9, 0.1])
        assert h.coords.tolist() == [0.9, 0.0, 0.1, 0.0]
        assert dual_norm(c0_l2_pair, h) == pytest.approx(1.0)

    def test_iterative_matches_closed_form(self):
        space = LpSpace(p=2, dim=3)
        h = hahn_banach_min_extension(space, [1], [0.7], method="iterative")
        assert h.coords == pytest.approx([0.0, 0.7, 0.0], abs=1e-6)

    def test_iterative_finds_minimiser_on_mixed_sum(self):
        """The solver starts away from zero and has to find the zero extension."""
        space = C0Sum(components=(LpSpace(p=2, dim=2), LpSpace(p=3, dim=2)))
        closed = hahn_banach_min_extension(space, [0, 2], [0.6, -0.3])
        h = hahn_banach_min_extension(space, [0, 2], [0.6, -0.3], method="iterative")
        assert h.coords == pytest.approx([0.6, 0.0, -0.3, 0.0], abs=1e-6)
        assert dual_norm(space, h) == pytest.approx(dual_norm(space, closed), abs=1e-9)

    def test_iterative_solve_event(self, c0_l2_pair, capturing_logger, log_capture):
        hahn_banach_min_extension(
            c0_l2_pair, [0, 2], [0.9, 0.1], method="iterative", logger=capturing_logger
        )
        event = log_capture.named("extension.solved")[0]
        assert event["iterations"] > 0
        assert event["free_coordinates"] == 2

    def test_l1_extension_not_unique(self):
        """The dual of l_1 is the sup norm, which leaves room on free coordinates."""
        with pytest.raises(NonUniqueExtensionError):
            hahn_banach_min_extension(LpSpace(p=1, dim=2), {0}, [1.0])

    def test_full_subspace(self, l2):
        h = hahn_banach_min_extension(l2, [0, 1], [0.3, 0.4], method="iterative")
        assert h.coords.tolist() == [0.3, 0.4]

    def test_value_count(self, l2):
        with pytest.raises(DimensionMismatchError):
            hahn_banach_min_extension(l2, [0], [1.0, 2.0])

    def test_coordinate_range(self, l2):
        with pytest.raises(IndexOutOfRangeError):
            hahn_banach_min_extension(l2, [2], [1.0])

    def test_unknown_method(self, l2):
        with pytest.raises(ValueError):
            hahn_banach_min_extension(l2, [0], [1.0], method="simplex")  # type: ignore[arg-type]


class TestC0ChainRetraction:
    """Test the chain retraction on duals of c0-sums."""

    def test_blend_at_second_step(self, c0_l2_pair):
        """|R_1* f| = 0.9 and |R_2* f| = 1.4: lambda = 0.2 scales the new coordinate."""
        handle = C0ChainRetraction(c0_l2_pair)
        f = DualElement(c0_l2_pair, [0.9, 0.0, 0.5, 0.0])
        assert handle.crossing_step(f.coords) == 2
        assert handle.apply(f).coords == pytest.approx([0.9, 0.0, 0.1, 0.0], abs=1e-9)

    def test_function_form(self, c0_l2_pair):
        f = DualElement(c0_l2_pair, [0.9, 0.0, 0.5, 0.0])
        out = c0_sum_retract(SubspaceChain((2, 2)), f)
        assert out.coords == pytest.approx([0.9, 0.0, 0.1, 0.0], abs=1e-9)

    def test_function_form_chain_mismatch(self, c0_l2_pair):
        f = DualElement(c0_l2_pair, [0.9, 0.0, 0.5, 0.0])
        with pytest.raises(ComponentMismatchError):
            c0_sum_retract(SubspaceChain((1, 3)), f)

    def test_first_step_normalizes(self, c0_l2_pair):
        handle = C0ChainRetraction(c0_l2_pair)
        f = DualElement(c0_l2_pair, [2.0, 0.0, 0.0, 0.0])
        assert handle.crossing_step(f.coords) == 1
        assert handle.apply(f).coords.tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_inside_ball(self, c0_l2_pair):
        handle = C0ChainRetraction(c0_l2_pair)
        f = DualElement(c0_l2_pair, [0.3, 0.2, 0.1, 0.1])
        assert handle.crossing_step(f.coords) == 5
        assert handle.apply(f) is f

    def test_image_on_sphere(self, rng):
        space = C0Sum(components=(LpSpace(p=2, dim=2), LpSpace(p=3, dim=3)))
        handle = C0ChainRetraction(space)
        for _ in range(50):
            coords = random_directions(space, rng, 1, dual=True)[0] * rng.uniform(1.05, 3.0)
            out = handle.apply(DualElement(space, coords))
            assert dual_norm(space, out) == pytest.approx(1.0, abs=1e-9)

    def test_iterative_extension_agrees(self, c0_l2_pair, rng):
        closed = C0ChainRetraction(c0_l2_pair)
        iterative = C0ChainRetraction(c0_l2_pair, extension_method="iterative")
        for _ in range(10):
            f = DualElement(c0_l2_pair, rng.standard_normal(4) * 2)
            assert iterative.apply(f).coords == pytest.approx(closed.apply(f).coords, abs=1e-6)

    def test_modulus_bound(self, c0_l2_pair):
        """delta(eps)^2 = 0.01 on the Euclidean plane gives eps = 2 sqrt(0.19)."""
        handle = C0ChainRetraction(c0_l2_pair)
        assert handle.chain_epsilon(0.01) == pytest.approx(2 * math.sqrt(0.19), abs=1e-9)
        assert handle.modulus_bound(0.01) == pytest.approx(2 * math.sqrt(0.19) + 0.09 + 0.2, abs=1e-9)

    def test_modulus_bound_capped(self, c0_l2_pair):
        handle = C0ChainRetraction(c0_l2_pair)
        assert handle.modulus_bound(0.5) == 2.0
        assert handle.modulus_bound(0.0) == 0.0
        assert handle.nearest_point_f(0.01) == handle.modulus_bound(0.01)

    def test_modulus_curve_non_decreasing(self, c0_l2_pair):
        curve = C0ChainRetraction(c0_l2_pair).modulus_f
        assert curve is not None
        assert np.all(np.diff(curve.values_array) >= 0)

    @pytest.mark.parametrize(
        "space",
        [
            C0Sum(components=(LpSpace(p=1, dim=2), LpSpace(p=2, dim=2))),
            C0Sum(components=(SupSpace(dim=2), LpSpace(p=2, dim=2))),
        ],
        ids=["l1-component", "sup-component"],
    )
    def test_flat_components_rejected(self, space):
        with pytest.raises(PreconditionModulusError):
            C0ChainRetraction(space)

    def test_needs_c0sum(self):
        with pytest.raises(UnsupportedSpaceError):
            C0ChainRetraction(L1Sum(components=(LpSpace(p=2, dim=2),)))

    def test_to_dict(self, c0_l2_pair):
        data = C0ChainRetraction(c0_l2_pair, extension_method="iterative").to_dict()
        assert data["kind"] == "c0chain"
        assert data["extension_method"] == "iterative"
        assert data["space"]["kind"] == "c0sum"

    def test_build_event(self, c0_l2_pair, capturing_logger, log_capture):
        C0ChainRetraction(c0_l2_pair, logger=capturing_logger)
        event = log_capture.named("retraction.built")[0]
        assert event["steps"] == 4
        assert event["extension"] == "closed_form"
