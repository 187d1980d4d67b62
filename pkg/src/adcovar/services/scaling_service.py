"""Least-squares fit of the inverse accepted step against the log of the gap."""

from __future__ import annotations

import math
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from adcovar.errors import FitError
from adcovar.file_handler import FileSystemHandler
from adcovar.models import ScalingFit, model_to_dict


def fit_inverse_dt_vs_loggap(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Ordinary least squares of 1/dt = slope * ln(g_min) + intercept.

    The residual is the RMS of the fit residuals; two points are interpolated
    and report exactly 0.

    Raises:
        FitError: With fewer than two points, nonpositive values, or all gaps equal
    """
    if len(points) < 2:
        raise FitError(f"Need at least 2 (g_min, dt) points, got {len(points)}")
    data = np.asarray(points, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FitError("Points must be (g_min, dt) pairs")
    if not np.all(np.isfinite(data)) or np.any(data <= 0.0):
        raise FitError("g_min and dt must be positive and finite")
    x = np.log(data[:, 0])
    y = 1.0 / data[:, 1]
    if np.ptp(x) == 0.0:
        raise FitError("All g_min values are equal; the slope is undetermined")
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    if len(points) == 2:
        residual = 0.0
    else:
        residual = math.sqrt(float(np.mean((design @ np.array([slope, intercept]) - y) ** 2)))
    return ScalingFit(float(slope), float(intercept), residual, len(points))


def load_scaling_points(
    path: Path | str,
    handler: FileSystemHandler | None = None,
    num_layers: int | None = None,
) -> list[tuple[float, float]]:
    """(g_min, dt) pairs from a scaling_points.csv; rows without a dt are skipped.

    A file covering several circuit depths must be narrowed with num_layers,
    since steps accepted at different depths do not share one fit.

    Raises:
        FileReadError: If the file cannot be read
        FitError: If the g_min or dt column is missing or not numeric, or the
            depth selection is missing or unmatched
    """
    handler = handler or FileSystemHandler()
    rows = handler.read_csv(path)
    if rows and ("g_min" not in rows[0] or "dt" not in rows[0]):
        raise FitError(f"{path} needs g_min and dt columns")
    depths = {row.get("num_layers") for row in rows} - {None, ""}
    if num_layers is not None:
        if not depths:
            raise FitError(f"{path} has no num_layers column to select {num_layers} from")
        rows = [row for row in rows if row.get("num_layers") == str(num_layers)]
        if not rows:
            raise FitError(f"{path} has no rows for num_layers={num_layers}")
    elif len(depths) > 1:
        raise FitError(
            f"{path} holds depths {sorted(depths, key=int)}; choose one with num_layers"
        )
    points = []
    for number, row in enumerate(rows, start=2):
        if not row["dt"] or not row["g_min"]:
            continue
        try:
            points.append((float(row["g_min"]), float(row["dt"])))
        except ValueError as e:
            raise FitError(f"{path}:{number}: not a number ({e})") from e
    return points


def fit_scaling_file(
    path: Path | str,
    handler: FileSystemHandler | None = None,
    num_layers: int | None = None,
) -> dict[str, Any]:
    points = load_scaling_points(path, handler, num_layers)
    result = {"file": str(path), **model_to_dict(fit_inverse_dt_vs_loggap(points))}
    if num_layers is not None:
        result["num_layers"] = num_layers
    return result
