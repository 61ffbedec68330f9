"""Deterministic JSON/CSV report writers.

Every file carries schema_version and a normalisation note (all measures
are nu = H^gamma|_X normalised to nu(X) = 1). CSV files start with '#'
comment lines followed by a header row; floats are serialised with repr
(shortest round-trip), so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .intervals import Interval

SCHEMA_VERSION = 1
NORMALIZATION_NOTE = "measures are nu = H^gamma restricted to X, normalised to nu(X)=1"


def iv_json(iv: Interval) -> list[float]:
    return [iv.lo, iv.hi]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_json(path, payload: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "normalization": NORMALIZATION_NOTE}
    doc.update(payload)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence], comments=()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema_version={SCHEMA_VERSION}", f"# {NORMALIZATION_NOTE}"]
    lines += [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}")
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Counterpart parser used by tests: skips '#' comments."""
    with open(path) as fh:
        content = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    header = content[0].split(",")
    return header, [ln.split(",") for ln in content[1:]]
