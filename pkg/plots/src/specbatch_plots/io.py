"""Reading and validating specbatch result files.

The contract with the producing package is purely file-level: CSVs with
optional `#`-prefixed metadata lines and a header row, plus the calibration
JSON. Unknown columns are ignored; missing required columns are an error.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaError(ValueError):
    """An input file does not carry the columns a figure needs."""


def read_csv(path) -> tuple[dict, list[dict]]:
    """Return (metadata, rows). Metadata comes from leading `# key=value`
    lines; rows are dicts keyed by the header."""
    lines = Path(path).read_text().splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            stripped = line.lstrip("# ")
            if "=" in stripped:
                key, _, value = stripped.partition("=")
                meta[key.strip()] = value.strip()
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))


def require_columns(rows: list[dict], required: list[str], path) -> None:
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        have = sorted(rows[0])
        raise SchemaError(
            f"{path}: missing required columns {missing}; file has {have}"
        )


def load_fit(path) -> tuple[float, float]:
    """Read the (c, gamma) acceptance fit from a calibration JSON."""
    doc = json.loads(Path(path).read_text())
    acc = doc.get("acceptance")
    if not acc or "c" not in acc or "gamma" not in acc:
        raise SchemaError(f"{path}: calibration JSON lacks an acceptance fit")
    return float(acc["c"]), float(acc["gamma"])
