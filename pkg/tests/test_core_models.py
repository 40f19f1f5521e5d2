"""Tests for core Pydantic models and policy loading.

Tests SpaceSpec validation and parsing, ModulusCurve shape rules,
NumericsPolicy validation, the kind enums, and load_policy() integration
with TOML configuration.
"""

from __future__ import annotations

import json
import math
import tempfile
from pathlib import Path

import pytest

from retlab.core import (
    C0Sum,
    CurveKind,
    L1Sum,
    LpSpace,
    LpSum,
    ModulusCurve,
    NumericsPolicy,
    PolicyValidationError,
    RetractionKind,
    SpaceSpecError,
    SupSpace,
    parse_space,
)
from retlab.core.errors import EmptyCurveError
from retlab.policies import DEFAULT_POLICY, load_policy


class TestKindEnums:
    """Test RetractionKind and CurveKind values."""

    def test_retraction_kind_values(self):
        """Every family has its JSON tag."""
        assert RetractionKind.RADIAL == "radial"
        assert RetractionKind.TRUNCATION == "truncation"
        assert RetractionKind.L1SUM == "l1sum"
        assert RetractionKind.C0CHAIN == "c0chain"
        assert RetractionKind.TRANSFERRED == "transferred"
        assert RetractionKind.COMPONENT == "component"
        assert len(list(RetractionKind)) == 6

    def test_curve_kind_values(self):
        """Curve kinds used by the moduli and the samplers."""
        assert CurveKind.MONOTONICITY.value == "monotonicity"
        assert CurveKind.OMEGA.value == "omega"
        assert CurveKind.BOUND in list(CurveKind)


class TestSpaceSpec:
    """Test SpaceSpec leaves and sums."""

    def test_lp_leaf(self):
        """Lp leaf keeps p and dim."""
        space = LpSpace(p=3, dim=4)
        assert space.p == 3.0
        assert space.total_dim == 4
        assert space.is_leaf

    def test_sup_leaf(self):
        """Sup leaf is its own kind."""
        space = SupSpace(dim=2)
        assert space.kind == "sup"
        assert space.total_dim == 2

    def test_sum_total_dim(self):
        """Sum dimension adds component dimensions."""
        space = C0Sum(components=(LpSpace(p=2, dim=2), SupSpace(dim=3)))
        assert space.total_dim == 5
        assert not space.is_leaf

    def test_p_below_one_rejected(self):
        """p < 1 is not a norm."""
        with pytest.raises(SpaceSpecError):
            LpSpace(p=0.5, dim=2)

    def test_infinite_p_rejected(self):
        """p = inf must use the sup kind."""
        with pytest.raises(SpaceSpecError, match="sup"):
            LpSpace(p=math.inf, dim=2)

    def test_zero_dim_rejected(self):
        """Dimension must be positive."""
        with pytest.raises(SpaceSpecError):
            SupSpace(dim=0)

    def test_empty_sum_rejected(self):
        """Sums need at least one component."""
        with pytest.raises(SpaceSpecError):
            L1Sum(components=())

    def test_lpsum_needs_p_above_one(self):
        """lp-sums cover 1 < p < inf only."""
        with pytest.raises(SpaceSpecError):
            LpSum(p=1.0, components=(LpSpace(p=2, dim=2),))

    def test_extra_fields_rejected(self):
        """Unknown keys are errors."""
        with pytest.raises(SpaceSpecError):
            LpSpace(p=2, dim=2, q=3)

    def test_specs_are_hashable_and_compare_by_value(self):
        """Frozen specs work as cache keys."""
        assert LpSpace(p=2, dim=2) == LpSpace(p=2.0, dim=2)
        assert hash(LpSpace(p=2, dim=2)) == hash(LpSpace(p=2.0, dim=2))
        assert LpSpace(p=2, dim=2) != LpSpace(p=2, dim=3)


class TestParseSpace:
    """Test parse_space() on JSON documents."""

    def test_parse_leaf_dict(self):
        space = parse_space({"kind": "lp", "p": 2, "dim": 3})
        assert space == LpSpace(p=2, dim=3)

    def test_parse_nested_json_string(self):
        document = json.dumps(
            {
                "kind": "l1sum",
                "components": [
                    {"kind": "lp", "p": 2, "dim": 2},
                    {"kind": "c0sum", "components": [{"kind": "sup", "dim": 1}]},
                ],
            }
        )
        space = parse_space(document)
        assert isinstance(space, L1Sum)
        assert isinstance(space.components[1], C0Sum)
        assert space.total_dim == 3

    def test_dump_round_trip(self):
        """model_dump output parses back to an equal spec."""
        space = C0Sum(components=(LpSpace(p=2, dim=2), LpSpace(p=3, dim=1)))
        assert parse_space(space.model_dump(mode="json")) == space

    def test_unknown_kind(self):
        with pytest.raises(SpaceSpecError):
            parse_space({"kind": "orlicz", "dim": 2})

    def test_invalid_json(self):
        with pytest.raises(SpaceSpecError):
            parse_space("{not json")


class TestModulusCurve:
    """Test ModulusCurve validation and evaluation."""

    def test_linear_interpolation(self):
        curve = ModulusCurve(kind=CurveKind.BOUND, grid=(0.0, 1.0), values=(0.0, 2.0))
        assert curve.evaluate(0.25) == pytest.approx(0.5)

    def test_clamped_extrapolation(self):
        """Outside the grid the curve holds its end values."""
        curve = ModulusCurve(kind=CurveKind.BOUND, grid=(0.1, 0.5), values=(1.0, 3.0))
        assert curve.evaluate(0.0) == 1.0
        assert curve.evaluate(10.0) == 3.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="same length"):
            ModulusCurve(kind=CurveKind.OMEGA, grid=(0.1, 0.2), values=(0.0,))

    def test_grid_must_increase(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            ModulusCurve(kind=CurveKind.OMEGA, grid=(0.2, 0.1), values=(0.0, 0.0))

    def test_moduli_non_decreasing(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            ModulusCurve(kind=CurveKind.CONVEXITY, grid=(0.1, 0.2), values=(0.05, 0.01))

    def test_monotonicity_bounded_by_epsilon(self):
        """M(eps) <= eps is a shape rule of monotonicity curves."""
        with pytest.raises(ValueError, match="never exceeds"):
            ModulusCurve(kind=CurveKind.MONOTONICITY, grid=(0.1, 0.2), values=(0.1, 0.5))

    def test_empty_curve_evaluate(self):
        curve = ModulusCurve(kind=CurveKind.OMEGA, grid=(), values=())
        assert len(curve) == 0
        with pytest.raises(EmptyCurveError):
            curve.evaluate(0.5)

    def test_from_function(self):
        curve = ModulusCurve.from_function(CurveKind.BOUND, [0.1, 0.2, 0.4], lambda t: 2 * t)
        assert curve.values == pytest.approx((0.2, 0.4, 0.8))

    def test_pointwise_max(self):
        a = ModulusCurve(kind=CurveKind.BOUND, grid=(0.0, 1.0), values=(0.0, 1.0))
        b = ModulusCurve(kind=CurveKind.BOUND, grid=(0.0, 1.0), values=(0.5, 0.5))
        top = ModulusCurve.pointwise_max([a, b])
        assert top.values == (0.5, 1.0)

    def test_pointwise_max_empty(self):
        with pytest.raises(EmptyCurveError):
            ModulusCurve.pointwise_max([])


class TestNumericsPolicy:
    """Test NumericsPolicy defaults and validation."""

    def test_default_values(self):
        """Defaults match DEFAULT_POLICY."""
        policy = NumericsPolicy()
        assert policy.equality_tol == 1e-9
        assert policy.sampled_tol == 1e-3
        assert policy.bisection_xtol == 1e-12
        assert policy.grid_points == 64
        assert policy.refine_iterations == 20
        assert policy.extension_maxiter == 10_000
        assert policy.extension_tol == 1e-10
        assert policy.omega_radius_low == 0.9
        assert policy.omega_radius_high == 1.5
        assert policy.ball_diameter == 2.0
        assert len(policy.modulus_grid) == 100
        assert policy.modulus_grid[0] == pytest.approx(0.01)
        assert policy.modulus_grid[-1] == pytest.approx(1.0)

    def test_negative_tolerance(self):
        with pytest.raises(PolicyValidationError):
            NumericsPolicy(equality_tol=-1.0)

    def test_radius_band_must_be_non_empty(self):
        with pytest.raises(PolicyValidationError, match="omega_radius_low"):
            NumericsPolicy(omega_radius_low=1.5, omega_radius_high=0.9)

    def test_modulus_grid_must_be_positive(self):
        with pytest.raises(PolicyValidationError):
            NumericsPolicy(modulus_grid=(0.0, 0.5))

    def test_model_validate_wraps_errors(self):
        with pytest.raises(PolicyValidationError):
            NumericsPolicy.model_validate({"grid_points": 0})


class TestLoadPolicy:
    """Test load_policy() merging TOML over DEFAULT_POLICY."""

    def test_missing_file_returns_defaults(self):
        policy = load_policy("does/not/exist.toml")
        assert policy.equality_tol == DEFAULT_POLICY["equality_tol"]

    def test_numerics_table_overrides(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "numerics.toml"
            path.write_text("[numerics]\nsampled_tol = 0.01\ngrid_points = 16\n")
            policy = load_policy(str(path))
        assert policy.sampled_tol == 0.01
        assert policy.grid_points == 16
        assert policy.equality_tol == 1e-9

    def test_top_level_keys(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "numerics.toml"
            path.write_text("bisection_maxiter = 50\n")
            policy = load_policy(str(path))
        assert policy.bisection_maxiter == 50

    def test_invalid_value(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "numerics.toml"
            path.write_text("[numerics]\nbisection_maxiter = -3\n")
            with pytest.raises(PolicyValidationError):
                load_policy(str(path))

    def test_malformed_toml(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "numerics.toml"
            path.write_text("[numerics\nsampled_tol = \n")
            with pytest.raises(PolicyValidationError, match="not valid TOML"):
                load_policy(str(path))

    def test_unreadable_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            with pytest.raises(PolicyValidationError, match="could not be read"):
                load_policy(tmp)

    def test_shipped_policy_loads(self):
        """config/numerics.toml is valid and equal to the defaults."""
        shipped = Path(__file__).resolve().parent.parent / "config" / "numerics.toml"
        policy = load_policy(str(shipped))
        assert policy == NumericsPolicy(**DEFAULT_POLICY)
