"""
Experiment runners.

Each runner turns an ExperimentConfig into an ExperimentReport. Per-sample
work is fanned out over a thread pool with one SeedSequence child per
sample index; results come back in index order, so output does not depend
on the number of workers.
"""

from __future__ import annotations

import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import Any, TypeVar

import numpy as np

from lab_cli.config import ExperimentConfig, ExperimentKind
from lab_cli.reporting import ExperimentReport
from retlab.bpb import (
    bpb_point,
    convex_series_bound,
    perturb_compact,
    random_bpb_instance,
    random_lemma_instance,
    random_premise_instance,
)
from retlab.compactify import TransferredRetraction
from retlab.core.base import RetractionHandle
from retlab.core.errors import (
    ConfigInvalidError,
    NotUniformlyConvexError,
    PremiseViolationError,
    RetractionLabError,
    UnsupportedSpaceError,
)
from retlab.core.factory import create_retraction
from retlab.core.logging import LabLogger
from retlab.core.models import L1Sum, NumericsPolicy, RetractionKind, SpaceSpec, SupSpace
from retlab.moduli import modulus_convexity, modulus_monotonicity, monotonicity_inverse
from retlab.operators import is_norm_attaining
from retlab.policies import load_policy
from retlab.retractions import (
    TruncationRetraction,
    check_coordinatewise_limit,
    directed_cases,
    omega_estimate,
)
from retlab.spaces import dual_norm, norm, pair

T = TypeVar("T")

# Slack allowed between a sampled modulus and its claimed bound
BOUND_SLACK = 1e-6


def _fan_out(config: ExperimentConfig, count: int, work: Callable[[int, np.random.Generator], T]) -> list[T]:
    children = np.random.SeedSequence(config.seed).spawn(count)

    def run(index: int) -> T:
        return work(index, np.random.default_rng(children[index]))

    if config.workers == 1:
        return [run(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(run, range(count)))


def _space(config: ExperimentConfig) -> SpaceSpec:
    if config.space is None:
        raise ConfigInvalidError(f"{config.experiment.value} needs a space")
    return config.space


def run_modulus(config: ExperimentConfig, policy: NumericsPolicy, logger: LabLogger) -> ExperimentReport:
    """epsilon, M, delta, M^-1(M(epsilon)) for the lattice ``config.space``."""
    space = _space(config)
    tol = policy.sampled_tol

    def row(index: int, rng: np.random.Generator) -> dict[str, Any]:
        eps = config.grid[index]
        m = modulus_monotonicity(space, eps, policy, seed=config.seed)
        try:
            delta: float | None = modulus_convexity(space, eps, policy, seed=config.seed)
        except NotUniformlyConvexError:
            delta = None
        return {
            "epsilon": eps,
            "M": m,
            "delta": delta,
            "M_inverse_of_M": monotonicity_inverse(space, m, policy),
        }

    rows = _fan_out(config, len(config.grid), row)
    failures = 0
    for r in rows:
        if r["M_inverse_of_M"] < r["epsilon"] - tol or r["M"] > r["epsilon"] + tol:
            failures += 1
            logger.log_property_failed(config.experiment.value, r)
    return ExperimentReport(
        config.experiment.value, ["epsilon", "M", "delta", "M_inverse_of_M"], rows, failures
    )


def build_handle(config: ExperimentConfig, policy: NumericsPolicy, logger: LabLogger) -> RetractionHandle:
    """Handle of family ``config.retraction`` on the dual of ``config.space``.

    l1sum uses truncation children; transferred wraps truncation on C(K)*
    with one extra point.
    """
    space = _space(config)
    kind = RetractionKind(config.retraction)
    try:
        match kind:
            case RetractionKind.L1SUM:
                if not isinstance(space, L1Sum):
                    raise UnsupportedSpaceError("l1sum retraction needs an l1sum space")
                children = [TruncationRetraction(c, policy, logger) for c in space.components]
                return create_retraction(kind, space, children=children, policy=policy, logger=logger)
            case RetractionKind.TRANSFERRED:
                if not isinstance(space, SupSpace):
                    raise UnsupportedSpaceError("transferred retraction needs a sup space (C_0(L))")
                child = TruncationRetraction(SupSpace(dim=space.dim + 1), policy, logger)
                return TransferredRetraction(child, policy=policy, logger=logger)
        return create_retraction(kind, space, policy=policy, logger=logger)
    except RetractionLabError as e:
        raise ConfigInvalidError(f"cannot build {kind.value} retraction on {space!r}: {e}") from e


def run_continuity(config: ExperimentConfig, policy: NumericsPolicy, logger: LabLogger) -> ExperimentReport:
    """omega-hat against the handle's claimed bound, plus directed-sequence verdicts."""
    handle = build_handle(config, policy, logger)

    def point(index: int, rng: np.random.Generator) -> float:
        t = config.grid[index]
        seed = int(rng.integers(2**32))
        curve = omega_estimate(handle, [t], seed=seed, samples=config.samples, policy=policy)
        return curve.values[0]

    raw = np.maximum.accumulate(np.asarray(_fan_out(config, len(config.grid), point)))
    rows = []
    failures = 0
    for t, omega in zip(config.grid, raw.tolist(), strict=True):
        bound = handle.modulus_bound(t)
        passed = True if bound is None else omega <= bound + BOUND_SLACK
        row = {"t": t, "omega_hat": omega, "bound_2Minv": bound, "pass": passed}
        if not passed:
            failures += 1
            logger.log_property_failed(config.experiment.value, row)
        rows.append(row)

    verdicts = []
    if handle.space.total_dim >= 3:
        for case in directed_cases(handle.space):
            verdict = check_coordinatewise_limit(handle, case, policy.sampled_tol)
            verdicts.append(
                {"case": verdict.name, "final_error": verdict.errors[-1], "pass": verdict.passed}
            )
            if not verdict.passed:
                failures += 1
                logger.log_property_failed("directed", verdicts[-1])

    return ExperimentReport(
        config.experiment.value,
        ["t", "omega_hat", "bound_2Minv", "pass"],
        rows,
        failures,
        extra={"handle": handle.to_dict(), "directed": verdicts},
    )


def run_bpb(config: ExperimentConfig, policy: NumericsPolicy, logger: LabLogger) -> ExperimentReport:
    """Random premise-satisfying (x, f) pushed to norming pairs."""
    space = _space(config)

    def row(index: int, rng: np.random.Generator) -> dict[str, Any]:
        eps = config.grid[index % len(config.grid)]
        x, f = random_bpb_instance(space, eps, rng)
        result = bpb_point(space, x, f, eps, policy, logger)
        pair_gy = pair(result.g, result.y)
        dist_xy = norm(space, x.coords - result.y.coords)
        dist_fg = dual_norm(space, f.coords - result.g.coords)
        passed = (
            abs(pair_gy - 1.0) <= policy.equality_tol
            and abs(norm(space, result.y) - 1.0) <= policy.equality_tol
            and abs(dual_norm(space, result.g) - 1.0) <= policy.equality_tol
            and dist_xy < eps
            and dist_fg < eps
        )
        return {
            "instance": index,
            "epsilon": eps,
            "pair_gy": pair_gy,
            "dist_xy": dist_xy,
            "dist_fg": dist_fg,
            "strategy": result.strategy,
            "pass": passed,
        }

    rows = _fan_out(config, config.samples, row)
    failures = sum(1 for r in rows if not r["pass"])
    for r in rows:
        if not r["pass"]:
            logger.log_property_failed(config.experiment.value, r)
    return ExperimentReport(
        config.experiment.value,
        ["instance", "epsilon", "pair_gy", "dist_xy", "dist_fg", "strategy", "pass"],
        rows,
        failures,
    )


def run_perturbation(config: ExperimentConfig, policy: NumericsPolicy, logger: LabLogger) -> ExperimentReport:
    """Random (T, x0) with |T x0| > 1 - eps^2/64 perturbed to norm-attaining S."""
    space = _space(config)

    def row(index: int, rng: np.random.Generator) -> dict[str, Any]:
        eps = config.grid[index % len(config.grid)]
        T, x0 = random_premise_instance(space, config.points, eps, eps**2 / 64.0, rng)
        base = {"instance": index, "epsilon": eps}
        try:
            certificate = perturb_compact(T, x0, eps, policy, logger)
        except PremiseViolationError as e:
            logger.log_instance_skipped(config.experiment.value, index, str(e))
            return {**base, "skipped": True}
        attained, _ = is_norm_attaining(certificate.new_operator, policy.equality_tol)
        attained = attained and abs(certificate.norm_Sx1 - 1.0) <= policy.equality_tol
        return {
            **base,
            "distance": certificate.distance,
            "bound_4eps": certificate.bound,
            "attained": attained,
            "pass": certificate.verify(policy.equality_tol) and attained,
            "skipped": False,
        }

    rows = _fan_out(config, config.samples, row)
    skipped = sum(1 for r in rows if r["skipped"])
    failures = 0
    for r in rows:
        if not r["skipped"] and not r["pass"]:
            failures += 1
            logger.log_property_failed(config.experiment.value, r)
    return ExperimentReport(
        config.experiment.value,
        ["instance", "epsilon", "distance", "bound_4eps", "attained", "pass", "skipped"],
        rows,
        failures,
        skipped,
    )


def run_lemma(config: ExperimentConfig, policy: NumericsPolicy, logger: LabLogger) -> ExperimentReport:
    """Random convex series satisfying the premise; A must carry the guaranteed mass."""

    def row(index: int, rng: np.random.Generator) -> dict[str, Any]:
        c, alpha, eta, r = random_lemma_instance(rng, max(config.points, 2))
        result = convex_series_bound(c, alpha, eta, r)
        return {
            "instance": index,
            "eta": eta,
            "r": r,
            "mass_A": result.mass,
            "threshold": result.threshold,
            "ok": result.ok,
        }

    rows = _fan_out(config, config.samples, row)
    failures = 0
    for r in rows:
        if not r["ok"]:
            failures += 1
            logger.log_property_failed(config.experiment.value, r)
    return ExperimentReport(
        config.experiment.value, ["instance", "eta", "r", "mass_A", "threshold", "ok"], rows, failures
    )


RUNNERS: dict[ExperimentKind, Callable[[ExperimentConfig, NumericsPolicy, LabLogger], ExperimentReport]] = {
    ExperimentKind.MODULUS: run_modulus,
    ExperimentKind.CONTINUITY: run_continuity,
    ExperimentKind.BPB: run_bpb,
    ExperimentKind.PERTURBATION: run_perturbation,
    ExperimentKind.LEMMA: run_lemma,
}


def run_experiment(config: ExperimentConfig, logger: LabLogger | None = None) -> ExperimentReport:
    """Load the policy, run the configured experiment and log its outcome."""
    logger = logger or LabLogger("lab_cli")
    policy = load_policy(config.policy_path)
    logger.log_experiment_start(config.experiment.value, config.model_dump(mode="json"))
    start = time.perf_counter()
    report = RUNNERS[config.experiment](config, policy, logger)
    logger.log_experiment_complete(
        config.experiment.value,
        len(report.rows),
        report.failures,
        report.skipped,
        (time.perf_counter() - start) * 1000,
    )
    return report
