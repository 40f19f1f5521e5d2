"""
CSV reports, JSON sidecars and the console summary.

Rows are written only after an experiment has finished, so a failed run
leaves no partial files behind. Floats are written with repr() so the same
config and seed give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.table import Table

from retlab.core.models import ModulusCurve


@dataclass
class ExperimentReport:
    """Rows of one experiment plus what the summary and sidecar need."""

    experiment: str
    columns: list[str]
    rows: list[dict[str, Any]]
    failures: int = 0
    skipped: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_csv(path: Path | str, columns: list[str], rows: list[dict[str, Any]]) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])
    return out


def write_curve_csv(path: Path | str, curve: ModulusCurve) -> Path:
    """Two-column (t, value) export of a tabulated curve."""
    rows = [{"t": t, "value": v} for t, v in zip(curve.grid, curve.values, strict=True)]
    return write_csv(path, ["t", "value"], rows)


def write_sidecar(path: Path | str, config: dict[str, Any], report: ExperimentReport) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "config": config,
        "summary": {
            "rows": len(report.rows),
            "failures": report.failures,
            "skipped": report.skipped,
        },
        **report.extra,
    }
    out.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def print_summary(report: ExperimentReport, output_path: str, console: Console | None = None) -> None:
    """Summary table on stderr; stdout stays free for pipelines."""
    console = console or Console(stderr=True)
    table = Table(title=f"retlab {report.experiment}")
    table.add_column("rows", justify="right")
    table.add_column("failures", justify="right")
    table.add_column("skipped", justify="right")
    table.add_column("status")
    table.add_column("output")
    status = "[green]pass[/green]" if report.passed else "[red]FAIL[/red]"
    table.add_row(
        str(len(report.rows)), str(report.failures), str(report.skipped), status, output_path
    )
    console.print(table)
