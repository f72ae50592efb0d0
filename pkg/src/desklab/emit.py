"""Serialize a :class:`RunSummary` as JSON or CSV.

Floats are rounded to 12 significant digits before writing; non-finite
values become ``null`` in JSON and empty cells in CSV.  Key order is fixed
by construction and wall-clock time is left out so that identical configs
give byte-identical files.

CSV layouts (one header row, then data):

* ``inverse_epr``, ``mixed_measurement``, ``hardy_chain``:
  ``classification, count, frequency, stderr``
* ``bell_table``: ``axis1, axis2, trials, E, stderr``, one row per cell
* ``billiard_break``: ``time, entropy, energy_share_spread``, the mean over
  trials at each sample time
* ``billiard_echo``: ``trial, seed, K, echo_error, perturbed_echo_error``
"""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .runner import RunSummary, summary_dict

SIG_DIGITS = 12


def round_sig(x: float) -> float | None:
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def _clean(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if isinstance(v, (bool, str)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    r = round_sig(v)
    return "" if r is None else f"{r:.{SIG_DIGITS}g}"


def to_json(summary: RunSummary) -> bytes:
    return (json.dumps(_clean(summary_dict(summary)), indent=2, allow_nan=False) + "\n").encode()


def to_csv(summary: RunSummary) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(summary.row_columns)
    for row in summary.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue().encode()


def emit(summary: RunSummary, fmt: str) -> bytes:
    if fmt == "json":
        return to_json(summary)
    if fmt == "csv":
        return to_csv(summary)
    raise ValueError(f"unknown format {fmt!r}; expected csv or json")
