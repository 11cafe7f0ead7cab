"""Readers for coupled-dyson artifacts.

Artifacts are CSV files opening with a `# config_hash=... seed=... version=...`
comment line followed by a header row, or JSON reports carrying the same
metadata keys. Readers validate the schema version and requested columns and
fail fast; they never write back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_VERSIONS = {"1.0.0"}


class SchemaError(ValueError):
    """Artifact header, version, or column layout is not what was pinned."""


class EmptySeriesError(ValueError):
    """Artifact parsed fine but holds no data rows."""


@dataclass
class Table:
    columns: list
    data: np.ndarray            # (n_rows, n_cols) floats
    meta: str                   # the raw comment line

    def col(self, name):
        if name not in self.columns:
            raise SchemaError(f"missing column {name!r} (have {self.columns})")
        return self.data[:, self.columns.index(name)]


def read_table(path, require=()):
    path = Path(path)
    lines = path.read_text().splitlines()
    if len(lines) < 2 or not lines[0].startswith("# config_hash="):
        raise SchemaError(f"{path}: missing artifact header line")
    version = None
    for token in lines[0].split():
        if token.startswith("version="):
            version = token.split("=", 1)[1]
    if version not in SUPPORTED_VERSIONS:
        raise SchemaError(f"{path}: unsupported artifact version {version!r}")
    columns = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    if not rows:
        raise EmptySeriesError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    if data.shape[1] != len(columns):
        raise SchemaError(f"{path}: row width {data.shape[1]} != header {len(columns)}")
    table = Table(columns=columns, data=data, meta=lines[0])
    for name in require:
        table.col(name)
    return table


def read_report(path, require=()):
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("version") not in SUPPORTED_VERSIONS:
        raise SchemaError(f"{path}: unsupported artifact version {doc.get('version')!r}")
    for key in require:
        if key not in doc:
            raise SchemaError(f"{path}: missing key {key!r}")
    return doc
