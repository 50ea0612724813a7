"""File interchange for samples and attack traces.

Samples travel as a JSON array of numbers or a single CSV row; both
readers accept either shape and the extension picks the parser. Traces
serialize to the JSON layout consumed by the harness.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .attack import AttackTrace
from .exceptions import InvalidInputError
from .geometry import as_sample


def read_sample(path) -> np.ndarray:
    """Load one sample vector from a .json or .csv file."""
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"sample file not found: {path}")
    if path.suffix.lower() == ".csv":
        with path.open(newline="", encoding="utf-8") as handle:
            rows = [row for row in csv.reader(handle) if row]
        if len(rows) != 1:
            raise InvalidInputError(f"expected a single CSV row in {path}, found {len(rows)}")
        return as_sample([float(cell) for cell in rows[0]])
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"sample file is not valid JSON: {path}: {exc}") from None
    if isinstance(doc, dict) and "values" in doc:
        doc = doc["values"]
    if not isinstance(doc, list):
        raise InvalidInputError(f"sample file must hold a JSON array: {path}")
    return as_sample([float(v) for v in doc])


def write_sample(path, sample) -> None:
    """Write a sample as JSON array or CSV row, by extension."""
    path = Path(path)
    sample = as_sample(sample)
    if path.suffix.lower() == ".csv":
        with path.open("w", newline="", encoding="utf-8") as handle:
            csv.writer(handle).writerow([repr(float(v)) for v in sample])
        return
    path.write_text(json.dumps([float(v) for v in sample]), encoding="utf-8")


def write_trace(path, trace: AttackTrace) -> None:
    """Serialize a trace deterministically (sorted keys, no stamps)."""
    Path(path).write_text(
        json.dumps(trace.to_json_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
