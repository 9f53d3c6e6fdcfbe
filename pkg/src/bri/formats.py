"""BRI CSV reading and writing.

Header ``i,xN,yN,zN,xA,yA,zA,xC,yC,zC``, one row per residue (row 1 with its
explicit zeros), values printed with 17 significant digits so a write/read
cycle is exact.
"""
from __future__ import annotations

import csv
import os

import numpy as np

from .errors import ParseError
from .invariant import BRI_COLUMNS, validate_bri

BRI_HEADER = ("i",) + BRI_COLUMNS
FORMAT_VERSION = "1"


def fmt(x: float) -> str:
    return f"{x:.17g}"


def bri_csv_text(bri, first_index: int = 1) -> str:
    lines = [",".join(BRI_HEADER)]
    for k, row in enumerate(np.asarray(bri, dtype=np.float64)):
        lines.append(",".join([str(first_index + k)] + [fmt(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


def write_bri_csv(bri, path_or_stream, first_index: int = 1) -> None:
    text = bri_csv_text(bri, first_index)
    if isinstance(path_or_stream, (str, os.PathLike)):
        with open(path_or_stream, "w", newline="") as fh:
            fh.write(text)
    else:
        path_or_stream.write(text)


def read_bri_csv(path_or_stream) -> np.ndarray:
    own = isinstance(path_or_stream, (str, os.PathLike))
    fh = open(path_or_stream, newline="") if own else path_or_stream
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != BRI_HEADER:
            raise ParseError("BRI CSV header must be " + ",".join(BRI_HEADER), 1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(BRI_HEADER):
                raise ParseError(f"expected {len(BRI_HEADER)} fields, got {len(row)}", lineno)
            try:
                if int(row[0]) != len(rows) + 1:
                    raise ParseError(f"row index {row[0]} out of sequence", lineno, "i")
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
    finally:
        if own:
            fh.close()
    if not rows:
        raise ParseError("BRI CSV has no rows")
    return validate_bri(np.array(rows))
