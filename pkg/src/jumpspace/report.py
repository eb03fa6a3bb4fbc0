"""Tabular experiment reports with deterministic CSV and JSON output."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .numeric import Dyadic


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (Dyadic, Fraction, int)):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


@dataclass
class ScanReport:
    """Rows of (inputs, exact outputs) plus run metadata.

    Exact values are written as rational strings such as ``"5/16"``; floats
    are written with 12 significant digits.  Column order is fixed by
    ``columns`` and row order by insertion, so output is reproducible.
    """

    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, **row) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        return [row.get(name) for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": {k: _jsonable(v) for k, v in self.metadata.items()},
            "columns": self.columns,
            "rows": [{c: _cell(row.get(c)) for c in self.columns} for row in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def merge(self, other: "ScanReport") -> "ScanReport":
        if other.columns != self.columns:
            raise ValueError("cannot merge reports with different columns")
        return ScanReport(list(self.columns), self.rows + other.rows, dict(self.metadata))


def _jsonable(value):
    if isinstance(value, (Dyadic, Fraction)):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
