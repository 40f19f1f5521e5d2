"""Structured logging for retraction builds, searches and experiment runs.

Provides LabLogger, a thin wrapper that emits dotted structlog events
(retlab.retraction.built, retlab.experiment.complete, ...). Logs go to stderr
so experiment output on stdout and CSV files stay clean. Single retraction
applications never log.
"""

from __future__ import annotations

import logging
import sys
from typing import Any

import structlog


def configure_structlog(level: int = logging.INFO, use_json: bool = False) -> None:
    """Configure structlog with stderr output.

    Args:
        level: Minimum log level (default: logging.INFO)
        use_json: If True, use JSON renderer; otherwise use console renderer
    """
    processors: list[Any] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.StackInfoRenderer(),
        structlog.dev.set_exc_info,
        structlog.processors.TimeStamper(fmt="iso"),
    ]

    if use_json:
        processors.append(structlog.processors.JSONRenderer())
    else:
        processors.append(structlog.dev.ConsoleRenderer())

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


class LabLogger:
    """Wrapper for structured logging of retraction-lab events.

    Accepts either a structlog logger, a standard logging.Logger or a name,
    and normalizes emission so callers do not care which backend is in use.
    """

    def __init__(self, logger: Any = None) -> None:
        if logger is None:
            self._logger = structlog.get_logger("retlab")
        elif isinstance(logger, str):
            self._logger = structlog.get_logger(logger)
        else:
            self._logger = logger

    @property
    def logger(self) -> Any:
        """Expose the underlying logger instance (structlog or logging.Logger)."""
        return self._logger

    def _emit(self, level: int, message: str, **fields: Any) -> None:
        extra = dict(fields)
        extra.setdefault("log_message", message)
        extra.setdefault("event", message.split(".", 1)[-1] if "." in message else message)

        if isinstance(self._logger, logging.Logger):
            self._logger.log(level, message, extra=extra)
            return

        method_name = logging.getLevelName(level).lower()
        log_method = getattr(self._logger, method_name, None)
        if not callable(log_method):
            log_method = self._logger.info

        log_kwargs = dict(extra)
        event_value = log_kwargs.pop("event", None)
        log_method(event_value if event_value is not None else message, **log_kwargs)

    def log_retraction_built(self, kind: str, space: dict[str, Any], **extra: Any) -> None:
        """Log construction of a retraction handle."""
        self._emit(
            logging.INFO,
            "retlab.retraction.built",
            event="retraction.built",
            kind=kind,
            space=space,
            **extra,
        )

    def log_bisection_failed(self, where: str, low: float, high: float) -> None:
        """Log a degenerate root bracket (an implementation bug, never a user error)."""
        self._emit(
            logging.ERROR,
            "retlab.retraction.bisection_failed",
            event="retraction.bisection_failed",
            where=where,
            bracket_low=low,
            bracket_high=high,
        )

    def log_numeric_modulus(self, quantity: str, epsilon: float, value: float, samples: int) -> None:
        """Log a modulus value obtained by sampling instead of a closed form."""
        self._emit(
            logging.DEBUG,
            "retlab.modulus.numeric",
            event="modulus.numeric",
            quantity=quantity,
            epsilon=epsilon,
            value=value,
            samples=samples,
        )

    def log_extension_solved(self, method: str, iterations: int, free_coordinates: int) -> None:
        """Log a Hahn-Banach extension solved by the iterative path."""
        self._emit(
            logging.DEBUG,
            "retlab.extension.solved",
            event="extension.solved",
            method=method,
            iterations=iterations,
            free_coordinates=free_coordinates,
        )

    def log_bpb_search(self, strategy: str, epsilon: float, parameter: float | None) -> None:
        """Log which BPB search strategy produced the certificate."""
        self._emit(
            logging.DEBUG,
            "retlab.bpb.search",
            event="bpb.search",
            strategy=strategy,
            epsilon=epsilon,
            search_parameter=parameter,
        )

    def log_search_exhausted(self, epsilon: float, best_gap: float) -> None:
        """Log an exhausted BPB search at ERROR level."""
        self._emit(
            logging.ERROR,
            "retlab.bpb.search_exhausted",
            event="bpb.search_exhausted",
            epsilon=epsilon,
            best_gap=best_gap,
        )

    def log_perturbation_certified(
        self, theorem: str, epsilon: float, distance: float, bound: float
    ) -> None:
        """Log a verified perturbation certificate."""
        self._emit(
            logging.DEBUG,
            "retlab.perturbation.certified",
            event="perturbation.certified",
            theorem=theorem,
            epsilon=epsilon,
            distance=distance,
            bound=bound,
        )

    def log_experiment_start(self, experiment: str, config: dict[str, Any]) -> None:
        """Log the start of a CLI experiment with its configuration."""
        self._emit(
            logging.INFO,
            "retlab.experiment.start",
            event="experiment.start",
            experiment=experiment,
            seed=config.get("seed"),
            samples=config.get("samples"),
            grid_size=len(config.get("grid", ())),
            space=config.get("space"),
        )

    def log_experiment_complete(
        self, experiment: str, rows: int, failures: int, skipped: int, duration_ms: float
    ) -> None:
        """Log the end of a CLI experiment with row and failure counts."""
        self._emit(
            logging.INFO,
            "retlab.experiment.complete",
            event="experiment.complete",
            experiment=experiment,
            rows=rows,
            failures=failures,
            skipped=skipped,
            duration_ms=duration_ms,
        )

    def log_property_failed(self, experiment: str, row: dict[str, Any]) -> None:
        """Log a row whose pass column is false."""
        self._emit(
            logging.WARNING,
            "retlab.experiment.property_failed",
            event="experiment.property_failed",
            experiment=experiment,
            row=row,
        )

    def log_instance_skipped(self, experiment: str, instance: int, reason: str) -> None:
        """Log a randomly generated instance that missed its premise."""
        self._emit(
            logging.DEBUG,
            "retlab.experiment.skipped",
            event="experiment.skipped",
            experiment=experiment,
            instance=instance,
            reason=reason,
        )
