"""Experiment reports and their on-disk form.

A report is the single source for everything written to disk: one JSON file
with full provenance (config echo, seeds, tolerances, timings, schema
version) plus one CSV per table.  CSV bodies are deterministic: UTF-8, LF
line endings, '.' decimal separator, floats printed with %.12g.  Wall-clock
timings live only in the JSON.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .models import RNG_NAME

REPORT_SCHEMA_VERSION = 1


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return "nan"
        return f"{float(value):.12g}"
    return str(value)


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row width {len(values)} != {len(self.columns)} columns")
        self.rows.append(list(values))

    def body(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


@dataclass
class ExperimentReport:
    """Structured record of one experiment run."""

    experiment: str
    config: dict
    results: dict = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION
    rng: str = RNG_NAME

    def table(self, name: str, columns: list[str]) -> Table:
        if name not in self.tables:
            self.tables[name] = Table(columns=columns)
        return self.tables[name]

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "rng": self.rng,
            "config": self.config,
            "results": self.results,
            "tables": {
                name: {"columns": t.columns, "rows": [[_jsonable(v) for v in r] for r in t.rows]}
                for name, t in self.tables.items()
            },
            "timings_seconds": self.timings,
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)

    def write_json(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def emit_plot_data(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write every table of the report as a CSV file; header-only when empty."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in sorted(report.tables.items()):
        path = out / f"{name}.csv"
        path.write_text(table.body(), encoding="utf-8", newline="")
        written.append(path)
    return written
