"""Canonical JSON and CSV writers.

JSON is compact, keys sorted, floats printed with 17 significant digits,
so parsing and re-serializing any output reproduces it byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import NonFinite


def _encode(obj) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        x = float(obj)
        if not math.isfinite(x):
            raise NonFinite(f"cannot serialize {x!r}")
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k, ensure_ascii=False) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj)


def format_float(x) -> str:
    return format(float(x), ".17g")


def csv_text(rows: Iterable[Iterable], header: Iterable[str] | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, Fraction, np.floating)) else v for v in row])
    return buf.getvalue()


def counts_field(x: Iterable[int]) -> str:
    """Count vector as one CSV field, entries separated by spaces."""
    return " ".join(str(int(v)) for v in x)
