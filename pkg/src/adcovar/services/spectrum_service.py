"""Exact spectra along a schedule, exported as CSV."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np

from adcovar.config import ExperimentConfig
from adcovar.file_handler import FileSystemHandler
from adcovar.models import format_float, model_to_dict
from adcovar.oracle import gap_and_epsilon, scan_spectra
from adcovar.schedule import MorphSchedule
from adcovar.services.experiment_service import resolve_instance

logger = logging.getLogger(__name__)


def spectrum_columns(num_qubits: int) -> list[str]:
    return ["s", *(f"E_{k}" for k in range(1 << num_qubits))]


def export_spectrum(schedule: MorphSchedule, grid_points: int = 201) -> list[dict[str, str]]:
    """Rows s, E_0, ..., E_{2^N-1} on a uniform grid over [0, 1].

    Raises:
        CapacityError: If the schedule is too large for the exact oracle
        ValueError: If grid_points < 2
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    grid = np.linspace(0.0, 1.0, grid_points)
    spectra = scan_spectra(schedule, grid)
    columns = spectrum_columns(schedule.num_qubits)
    return [
        dict(zip(columns, (format_float(v) for v in (s, *energies)), strict=True))
        for s, energies in zip(grid, spectra, strict=True)
    ]


def write_spectra(
    config: ExperimentConfig,
    output_dir: Path | str | None = None,
    grid_points: int | None = None,
    handler: FileSystemHandler | None = None,
) -> dict[str, Any]:
    """Write spectrum_seed<seed>.csv and a gap summary for every seed."""
    handler = handler or FileSystemHandler()
    output_dir = Path(output_dir if output_dir is not None else config.output_dir)
    points = grid_points or config.gap_grid_points
    files = []
    gaps = []
    for seed in config.seeds:
        _, schedule = resolve_instance(config, seed)
        path = output_dir / f"spectrum_seed{seed}.csv"
        handler.write_csv(
            path, spectrum_columns(schedule.num_qubits), export_spectrum(schedule, points)
        )
        gap = gap_and_epsilon(schedule, points)
        logger.info("seed %d: g_min=%.6g at s=%.4f", seed, gap.g_min, gap.s_at_min)
        files.append(str(path))
        gaps.append({"seed": seed, **gap.summary()})
    return {"output_dir": str(output_dir), "files": files, "gaps": model_to_dict(gaps)}
