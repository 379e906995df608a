"""Minimal numeric CSV reader shared by the matrix, sample and label loaders."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import InputFormatError


def read_numeric_csv(path: str | Path) -> np.ndarray:
    """Read a rectangular CSV of decimal values into a 2-D float array.

    Blank lines are skipped and any line whose first non-space character is
    ``#`` is treated as a header/comment. Errors carry the 1-based line number.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise InputFormatError(
                    f"non-numeric value in row {row!r}", path, lineno
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InputFormatError(
                    f"expected {width} columns, found {len(values)}", path, lineno
                )
            rows.append(values)
    if not rows:
        raise InputFormatError("no data rows", path)
    return np.asarray(rows, dtype=float)
