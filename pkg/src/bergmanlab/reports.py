"""Report records and their CSV / JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Metric",
    "ReportRecord",
    "SCHEMAS",
    "format_csv",
    "write_csv",
    "write_summary",
    "read_csv",
]

# Versioned CSV schemas; the first line of every data file is "#schema=<name>/<version>".
SCHEMAS = {
    "grid_values": ("grid_values/1", ("N", "chart", "re_z", "im_z", "value")),
    "scaled_grid_values": ("scaled_grid_values/1", ("N", "scale", "chart", "re_z", "im_z", "value")),
    "level_metrics": ("level_metrics/1", ("N", "metric", "value")),
    "gram": ("gram/1", ("N", "row", "col", "re", "im")),
    "checks": ("checks/1", ("case", "value", "reference", "error")),
}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def format_csv(schema, rows):
    """CSV text with the schema header; floats are written with ``%.17g``."""
    tag, columns = SCHEMAS[schema]
    buf = io.StringIO()
    buf.write(f"#schema={tag}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row {row!r} does not match schema {tag}")
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, schema, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(schema, rows))
    return path


def read_csv(path):
    """``(schema tag, header, rows)`` of a file written by :func:`write_csv`."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#schema="):
        raise ValueError(f"{path} has no schema header")
    reader = csv.reader(lines[1:])
    header = next(reader)
    return lines[0][len("#schema="):], header, list(reader)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


@dataclass
class Metric:
    """A measured value judged against a tolerance.

    ``kind`` is ``"max"`` (pass if value <= tolerance), ``"min"`` (pass if
    value >= tolerance) or ``"band"`` (pass if |value - target| <= tolerance).
    """

    name: str
    value: float
    tolerance: float
    kind: str = "max"
    target: float | None = None

    @property
    def passed(self):
        v = float(self.value)
        if not math.isfinite(v) and self.kind != "max":
            return False
        if self.kind == "max":
            return v <= self.tolerance
        if self.kind == "min":
            return v >= self.tolerance
        if self.kind == "band":
            return abs(v - self.target) <= self.tolerance
        raise ValueError(f"unknown metric kind {self.kind!r}")

    def to_dict(self):
        out = {"name": self.name, "value": self.value, "tolerance": self.tolerance, "kind": self.kind}
        if self.target is not None:
            out["target"] = self.target
        out["passed"] = self.passed
        return out


@dataclass
class ReportRecord:
    """Outcome of one experiment."""

    experiment: str
    inputs: dict
    metrics: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0
    data_file: str | None = None

    @property
    def passed(self):
        return all(m.passed for m in self.metrics)

    def failing(self):
        return [m for m in self.metrics if not m.passed]

    def to_dict(self, timings=True):
        out = {
            "experiment": self.experiment,
            "inputs": self.inputs,
            "metrics": [m.to_dict() for m in self.metrics],
            "details": self.details,
            "passed": self.passed,
            "data_file": self.data_file,
        }
        if timings:
            out["wall_time"] = self.wall_time
        return _jsonable(out)


def write_summary(path, records, config=None, timings=True):
    """``summary.json`` with the overall status and every record."""
    payload = {
        "passed": all(r.passed for r in records),
        "records": [r.to_dict(timings) for r in records],
    }
    if config is not None:
        payload["config"] = _jsonable(config)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    return path
