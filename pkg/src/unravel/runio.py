"""Deterministic file formats: manifests and delimited outputs.

All numeric fields are written with 17 significant digits so values
round-trip exactly; header comments carry the manifest hash (a digest of the
run configuration and code version), which makes outputs byte-identical
across reruns and worker counts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from datetime import datetime, timezone

from . import __version__
from .errors import MissingColumnError

__all__ = [
    "format_number",
    "config_hash",
    "Manifest",
    "write_csv",
    "read_csv",
]


def format_number(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int,)):
        return str(x)
    return f"{float(x):.17g}"


def config_hash(config: dict) -> str:
    """Digest of the canonicalized configuration plus the code version."""
    payload = json.dumps(
        {"version": __version__, "config": config}, sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class Manifest:
    """Full configuration snapshot of a run plus completion bookkeeping."""

    def __init__(self, config: dict):
        self.config = config
        self.version = __version__
        self.created_utc = datetime.now(timezone.utc).isoformat()
        self.finished_utc = None
        self.cells: dict[str, str] = {}

    @property
    def hash(self) -> str:
        return config_hash(self.config)

    def finish(self):
        self.finished_utc = datetime.now(timezone.utc).isoformat()

    def save(self, path):
        payload = {
            "version": self.version,
            "manifest_hash": self.hash,
            "config": self.config,
            "created_utc": self.created_utc,
            "finished_utc": self.finished_utc,
            "cells": self.cells,
        }
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "Manifest":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        manifest = cls(payload["config"])
        manifest.version = payload["version"]
        manifest.created_utc = payload["created_utc"]
        manifest.finished_utc = payload.get("finished_utc")
        manifest.cells = payload.get("cells", {})
        return manifest


def write_csv(path, meta: dict, columns: list[str], rows) -> None:
    """Write a delimited file with ``#``-prefixed metadata header lines.

    Metadata lines preserve insertion order; all values go through
    :func:`format_number` when numeric.  Writes are atomic (tmp + rename) so
    interrupted sweeps never leave half-written cells behind.
    """
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="\n", encoding="utf-8") as fh:
        for key, value in meta.items():
            if isinstance(value, (int, float)):
                value = format_number(value)
            fh.write(f"# {key}: {value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(v) if isinstance(v, (int, float)) else v for v in row])
    os.replace(tmp, path)


def read_csv(path):
    """Parse a metadata-headed CSV into (meta dict, list of row dicts)."""
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = None
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
            if header is None:
                header = raw
                continue
            rows.append(dict(zip(header, raw)))
    return meta, rows


def require_columns(rows, columns, path=""):
    """Raise :class:`MissingColumnError` naming the first absent column."""
    present = set(rows[0].keys()) if rows else set()
    for col in columns:
        if col not in present:
            raise MissingColumnError(col, path)
