"""CSV input layer for the figure scripts.

The renderers consume the simulator's delimited files (``#``-prefixed
metadata lines followed by a header row) and never recompute physics; this
module owns parsing and schema validation.  It deliberately has no
dependency on the simulator package: the CSV schema is the interface.
"""

from __future__ import annotations

import csv
from pathlib import Path


class FigureError(Exception):
    """Base class for rendering errors."""


class MissingColumnError(FigureError):
    """An input CSV lacks a column the figure needs."""

    def __init__(self, column: str, path=""):
        self.column = column
        self.path = str(path)
        where = f" in {path}" if path else ""
        super().__init__(f"missing required column '{column}'{where}")


class EmptyInputError(FigureError):
    """An input CSV carries no data rows."""


class Table:
    """Metadata plus rows of one delimited file."""

    def __init__(self, path, meta: dict, columns: list[str], rows: list[dict]):
        self.path = Path(path)
        self.meta = meta
        self.columns = columns
        self.rows = rows

    def require(self, *columns: str) -> "Table":
        for col in columns:
            if col not in self.columns:
                raise MissingColumnError(col, self.path)
        if not self.rows:
            raise EmptyInputError(f"no data rows in {self.path}")
        return self

    def floats(self, column: str):
        return [float(r[column]) for r in self.rows]

    def unique(self, column: str):
        seen = []
        for r in self.rows:
            v = r[column]
            if v not in seen:
                seen.append(v)
        return seen

    def where(self, **conditions) -> list[dict]:
        out = []
        for r in self.rows:
            if all(r[k] == str(v) for k, v in conditions.items()):
                out.append(r)
        return out


def read_table(path) -> Table:
    meta: dict[str, str] = {}
    columns: list[str] = []
    rows: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for raw in reader:
            if not raw:
                continue
            if raw[0].startswith("#"):
                text = ",".join(raw)[1:].strip()
                if ":" in text:
                    key, value = text.split(":", 1)
                    meta[key.strip()] = value.strip()
                continue
            if not columns:
                columns = raw
                continue
            rows.append(dict(zip(columns, raw)))
    return Table(path, meta, columns, rows)
