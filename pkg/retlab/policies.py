"""Numeric policy defaults and TOML-based configuration loading.

Every tolerance, sample count and iteration cap used by retlab lives in a
NumericsPolicy. load_policy() merges a TOML file over DEFAULT_POLICY so a
config file only needs the keys it changes.
"""

from __future__ import annotations

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pydantic import ValidationError

from retlab.core.errors import PolicyValidationError
from retlab.core.models import NumericsPolicy

DEFAULT_POLICY = {
    # Equality certificates (norms, pairings, restriction identities)
    "equality_tol": 1e-9,
    # Sampled inf/sup estimates and oracle agreement
    "sampled_tol": 1e-3,
    # Crossing parameters t and lambda
    "bisection_xtol": 1e-12,
    "bisection_maxiter": 200,
    # Two-stage numeric moduli: coarse samples per dimension, then local refinement
    "grid_points": 64,
    "refine_iterations": 20,
    # Iterative minimum-norm extension
    "extension_maxiter": 10_000,
    "extension_tol": 1e-10,
    "bpb_path_points": 64,
    # omega-hat samples near the sphere, where the modulus is realized
    "omega_radius_low": 0.9,
    "omega_radius_high": 1.5,
    "ball_diameter": 2.0,
}

_policy_cache: dict[str, NumericsPolicy] = {}


def default_policy() -> NumericsPolicy:
    """Shared default policy instance (models are immutable in practice)."""
    if "default" not in _policy_cache:
        _policy_cache["default"] = NumericsPolicy(**DEFAULT_POLICY)
    return _policy_cache["default"]


def load_policy(path: str = "config/numerics.toml") -> NumericsPolicy:
    """Load and merge a user numerics policy with the defaults.

    Args:
        path: Path to the policy TOML file. If the file doesn't exist, returns
              the default policy.

    Returns:
        NumericsPolicy: Validated policy model with merged configuration.

    Raises:
        PolicyValidationError: If the file is unreadable, is not valid TOML
            or contains invalid values
    """
    if not os.path.exists(path):
        return default_policy()

    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise PolicyValidationError(f"Policy file {path} is not valid TOML: {e}") from e
    except OSError as e:
        raise PolicyValidationError(f"Policy file {path} could not be read: {e}") from e

    # [numerics] table or top-level keys
    data = data.get("numerics", data)
    policy = DEFAULT_POLICY | data

    try:
        return NumericsPolicy(**policy)
    except PolicyValidationError:
        raise
    except ValidationError as e:
        raise PolicyValidationError(f"Policy validation failed: {e}") from e
