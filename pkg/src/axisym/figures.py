"""Reference trajectory recipes and their reproduction pipeline.

Six canonical runs, all started from the same state
(x, y, z, px, py, pz) = (1, -1, 1, 1, 0, 0) with canonical momenta in
the catalog gauge.  Two of them close exactly at rational multiples of
pi, two close approximately (the measured period is reported without
an exactness claim), and two do not close at all within the scanned
horizon.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import io as aio
from . import svg
from .catalog import SystemParams, build
from .dynamics import detect_period, integrate
from .phase import PhasePoint

REFERENCE_IC = (1.0, -1.0, 1.0, 1.0, 0.0, 0.0)

DETECT_HORIZON_OPEN = 200.0


@dataclass(frozen=True)
class FigureRecipe:
    """One reference run: system, parameters, horizons, expected closure."""

    figure_id: int
    system_id: str
    params: SystemParams
    ic: tuple = REFERENCE_IC
    horizons: tuple = (50.0,)          # plotted time windows
    expected_period: Optional[float] = None
    period_slack: float = 1e-4         # relative (exact) or absolute (approx)
    exact: bool = True                 # exact rational-multiple-of-pi closure
    detect_horizon: float = DETECT_HORIZON_OPEN
    tol_return: float = 1e-4


RECIPES = {
    1: FigureRecipe(
        figure_id=1, system_id="op_min",
        params=SystemParams(u1=2, u2=1.5, u3=-1, bz=7, bp=4, bs=2),
        horizons=(2.0, 7.0, 50.0), expected_period=None,
    ),
    2: FigureRecipe(
        figure_id=2, system_id="op_min",
        params=SystemParams(u1=1, u2=1.5, u3=-1, bz=2, bp=4, bs=2),
        horizons=(18.85,), expected_period=18.85, period_slack=0.05,
        exact=False, detect_horizon=25.0, tol_return=1e-3,
    ),
    3: FigureRecipe(
        figure_id=3, system_id="max5",
        params=SystemParams(u2=1.5, bz=2, n=3, m=2),
        horizons=(8.0 * math.pi,), expected_period=8.0 * math.pi,
        detect_horizon=30.0,
    ),
    4: FigureRecipe(
        figure_id=4, system_id="cp_min",
        params=SystemParams(u1=10, u2=1.5, u3=1, bz=2, bq=4),
        horizons=(3.0, 8.0, 50.0), expected_period=None,
    ),
    5: FigureRecipe(
        figure_id=5, system_id="cp_min",
        params=SystemParams(u1=1, u2=1.5, u3=0.5, bz=4),
        horizons=(12.57,), expected_period=12.57, period_slack=0.05,
        exact=False, detect_horizon=20.0, tol_return=1e-3,
    ),
    6: FigureRecipe(
        figure_id=6, system_id="max6",
        params=SystemParams(bz=3, n=1, m=2),
        horizons=(8.0 * math.pi / 3.0,), expected_period=8.0 * math.pi / 3.0,
        detect_horizon=12.0,
    ),
}


def run_figure(figure_id: int, outdir: str, tol: float = 1e-12,
               detect: bool = True) -> dict:
    """Reproduce one reference figure: CSV, SVG projections, meta JSON.

    Returns the meta dictionary (period report included when closure
    detection is requested).
    """
    recipe = RECIPES[figure_id]
    spec = build(recipe.system_id, recipe.params)
    ic = PhasePoint.from_state(recipe.ic)
    aio.ensure_dir(outdir)

    meta = {
        "figure": figure_id,
        "system_id": recipe.system_id,
        "params": recipe.params.as_dict(),
        "ic": list(recipe.ic),
        "tol": tol,
        "momenta": "canonical",
        "expected_period": recipe.expected_period,
        "files": [],
    }

    report = None
    if detect:
        report = detect_period(spec, ic, recipe.detect_horizon,
                               tol_return=recipe.tol_return,
                               tol=max(tol, 1e-12 if recipe.detect_horizon <= 50 else 1e-10))
        meta["period_report"] = report.as_dict()

    for horizon in recipe.horizons:
        # Plot the measured period when the expected value is approximate.
        t_end = horizon
        if report is not None and report.closed and len(recipe.horizons) == 1:
            t_end = report.period
        traj = integrate(spec, ic, t_end, tol=tol)
        tag = f"figure{figure_id}_t{horizon:g}".replace(".", "p")
        csv_path = os.path.join(outdir, f"{tag}.csv")
        labels = aio.write_trajectory_csv(csv_path, traj.times, traj.states,
                                          traj.traces)
        annotation = None
        if report is not None and report.closed:
            annotation = f"closes near t = {report.period:.6g}"
        svg_paths = svg.write_projections(
            os.path.join(outdir, tag), traj.states[:, :3],
            title=f"reference trajectory {figure_id}", annotation=annotation)
        meta["files"].append({"csv": csv_path, "svg": svg_paths,
                              "columns": ["t", "x", "y", "z", "px", "py", "pz", *labels],
                              "t_end": t_end})

    aio.write_meta(os.path.join(outdir, f"figure{figure_id}_meta.json"), meta)
    return meta
