"""Shared fixtures: reference parameter sets and sampling helpers."""

import numpy as np
import pytest

from axisym.catalog import SystemParams

# Parameter sets used by the bundled reference trajectories, plus
# representative choices for the systems that have no reference run.
PARAMS = {
    "linear_min": SystemParams(u1=1.0, bz=2.0),
    "linear_max": SystemParams(u1=1.0, bz=2.0),
    "op_min": SystemParams(u1=2.0, u2=1.5, u3=-1.0, bz=7.0, bp=4.0, bs=2.0),
    "cp_min_bq": SystemParams(u1=10.0, u2=1.5, u3=1.0, bz=2.0, bq=4.0),
    "cp_min_bz": SystemParams(u1=1.0, u2=1.5, u3=0.5, bz=4.0),
    "cp_min_bl": SystemParams(u1=1.0, u2=1.5, u3=0.5, bl=2.0),
    "max5": SystemParams(u2=1.5, bz=2.0, n=3, m=2),
    "max6": SystemParams(bz=3.0, n=1, m=2),
}

SYSTEM_OF = {
    "linear_min": "linear_min",
    "linear_max": "linear_max",
    "op_min": "op_min",
    "cp_min_bq": "cp_min",
    "cp_min_bz": "cp_min",
    "cp_min_bl": "cp_min",
    "max5": "max5",
    "max6": "max6",
}

REFERENCE_IC = np.array([1.0, -1.0, 1.0, 1.0, 0.0, 0.0])


@pytest.fixture
def reference_ic():
    return REFERENCE_IC.copy()
