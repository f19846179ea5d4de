"""Trajectory CSV, meta sidecar, and verification report serialization.

CSV columns are ``t,x,y,z,px,py,pz`` followed by the conserved-quantity
traces in catalog order; floats carry 17 significant digits so round
trips are bit-exact.  Every CSV gets a JSON sidecar recording the
system, parameters, tolerance, seed, and momentum interpretation.
"""

from __future__ import annotations

import json
import os
from typing import Optional, Sequence

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return FLOAT_FMT % float(x)


def trajectory_rows(times: np.ndarray, states: np.ndarray,
                    traces: dict, labels: Sequence[str]):
    for i, t in enumerate(times):
        row = [t, *states[i, :6]] + [traces[lbl][i] for lbl in labels]
        yield row


def write_trajectory_csv(path: str, times: np.ndarray, states: np.ndarray,
                         traces: dict, labels: Optional[Sequence[str]] = None) -> str:
    """Write one trajectory; returns the list of trace labels used."""
    if labels is None:
        labels = [lbl for lbl in ("H", "X1", "X2", "Y3", "Y4") if lbl in traces]
    header = "t,x,y,z,px,py,pz," + ",".join(labels)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in trajectory_rows(times, states, traces, labels):
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return list(labels)


def write_meta(path: str, meta: dict) -> None:
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def write_reports(path: str, reports: Sequence) -> None:
    """Verification reports as a JSON list of check dictionaries."""
    payload = [r.as_dict() if hasattr(r, "as_dict") else dict(r) for r in reports]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, frozenset):
        return sorted(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
