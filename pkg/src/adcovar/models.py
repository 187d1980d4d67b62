"""Core data models for adcovar.

This module defines the result records shared by the solvers, the exact oracle
and the experiment harness. All models are dataclasses; JSON serialization is
provided via the model_to_dict() helper function and CSV rows via the
Trajectory.rows() method.

Models:
- TrajectoryRecord: Parameters and diagnostics at one grid time
- Trajectory: Ordered records of one adiabatic (or plain VQE) run
- Spectrum: Exact eigenvalues (and optionally eigenvectors)
- GapReport: Minimum gap and transition amplitude along a schedule
- LinesearchResult: Outcome of the step-size line search
- ScalingFit: Linear fit of 1/dt against log(gap)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Literal

import numpy as np

Method = Literal["covar", "adiabatic_vqe", "vqe"]

TRAJECTORY_COLUMNS = (
    "method",
    "t",
    "step_index",
    "covar_iters",
    "energy",
    "f_norm",
    "delta_e",
    "level_index",
    "initial_bits",
    "theta",
)


def format_float(value: float | None) -> str:
    """Round-trippable text for a float; empty for None."""
    if value is None:
        return ""
    return f"{float(value):.17g}"


@dataclass
class TrajectoryRecord:
    """State of a run at one grid time.

    Attributes:
        t: Morphing time in [0, 1]
        step_index: Position on the time grid
        theta: Parameters after the inner solve at t
        energy: <H(t)> at theta
        f_norm: Noiseless covariance norm over the full operator pool
        covar_iters: Inner-solver updates spent at this step
        level_index: Index of the nearest exact eigenvalue (oracle runs only)
        delta_e: energy minus that eigenvalue (oracle runs only)
        f_norm_trace: Per-iteration norms of the inner solve
        energy_trace: Per-iteration energies of the inner solve
    """

    t: float
    step_index: int
    theta: np.ndarray
    energy: float
    f_norm: float
    covar_iters: int = 0
    level_index: int | None = None
    delta_e: float | None = None
    f_norm_trace: tuple[float, ...] = ()
    energy_trace: tuple[float, ...] = ()


@dataclass
class Trajectory:
    """Ordered records of one run.

    Attributes:
        method: "covar", "adiabatic_vqe" or "vqe"
        level: Requested eigenstate level
        initial_bits: Input basis state of the circuit
        num_parameters: nu
        records: One record per grid time, in order
        failed_at: Time of the failing step, if the run diverged
        error: Failure message, if any
    """

    method: Method
    level: int
    initial_bits: tuple[int, ...]
    num_parameters: int
    records: list[TrajectoryRecord] = field(default_factory=list)
    failed_at: float | None = None
    error: str | None = None

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> TrajectoryRecord:
        if not self.records:
            raise ValueError("Trajectory has no records")
        return self.records[-1]

    @property
    def total_iterations(self) -> int:
        return sum(record.covar_iters for record in self.records)

    @property
    def bits_label(self) -> str:
        return "".join(str(b) for b in self.initial_bits)

    def rows(self) -> list[dict[str, str]]:
        """CSV rows in TRAJECTORY_COLUMNS order, floats at full precision."""
        rows = []
        for record in self.records:
            rows.append({
                "method": self.method,
                "t": format_float(record.t),
                "step_index": str(record.step_index),
                "covar_iters": str(record.covar_iters),
                "energy": format_float(record.energy),
                "f_norm": format_float(record.f_norm),
                "delta_e": format_float(record.delta_e),
                "level_index": "" if record.level_index is None else str(record.level_index),
                "initial_bits": self.bits_label,
                "theta": " ".join(format_float(v) for v in record.theta),
            })
        return rows

    def trace_rows(self) -> list[dict[str, str]]:
        """Per-iteration inner-solver traces, one row per iteration."""
        rows = []
        for record in self.records:
            for iteration, (norm, energy) in enumerate(
                zip(record.f_norm_trace, record.energy_trace, strict=False)
            ):
                rows.append({
                    "step_index": str(record.step_index),
                    "t": format_float(record.t),
                    "iteration": str(iteration),
                    "f_norm": format_float(norm),
                    "energy": format_float(energy),
                })
        return rows


@dataclass
class Spectrum:
    """Ascending eigenvalues; eigenvectors are columns when requested."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])


@dataclass
class GapReport:
    """Gap statistics of a schedule scanned on a uniform grid.

    Attributes:
        g_min: Smallest ground-to-first-excited gap (0.0 when degenerate)
        s_at_min: Grid time of g_min
        epsilon_transition: Max over the grid of |<1(s)|dH/ds|0(s)>|
        t_bound: epsilon_transition / g_min^2, infinite when g_min is 0
        grid: Scanned times
        gaps: Ground-to-first-excited gap at every grid time
        level_gaps: All consecutive gaps E_{k+1} - E_k, shape (len(grid), 2^N - 1)
    """

    g_min: float
    s_at_min: float
    epsilon_transition: float
    t_bound: float
    grid: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    gaps: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    level_gaps: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 0)))

    def summary(self) -> dict[str, Any]:
        return {
            "g_min": self.g_min,
            "s_at_min": self.s_at_min,
            "epsilon_transition": self.epsilon_transition,
            "t_bound": self.t_bound,
        }


@dataclass
class LinesearchAttempt:
    delta_t: float
    final_error: float
    accepted: bool
    trajectory_file: str | None = None
    error: str | None = None


@dataclass
class LinesearchResult:
    """Outcome of dt_linesearch.

    Attributes:
        accepted_dt: First candidate meeting the target, None if exhausted
        best_error: Smallest final-energy error seen
        exhausted: True when no candidate met the target
        attempts: One entry per tried candidate, in order
        g_min: Minimum gap of the instance, when computed
    """

    accepted_dt: float | None
    best_error: float
    exhausted: bool
    attempts: list[LinesearchAttempt] = field(default_factory=list)
    g_min: float | None = None


@dataclass
class ScalingFit:
    """1/dt = slope * log(g_min) + intercept."""

    slope: float
    intercept: float
    residual: float
    num_points: int


def model_to_dict(obj: Any) -> Any:
    """Convert a dataclass model to a JSON-serializable dictionary.

    Handles numpy arrays and scalars, Paths and Enums, and maps non-finite
    floats to None so the output is strict JSON.

    Args:
        obj: A dataclass instance or any value

    Returns:
        A JSON-serializable dictionary or value
    """
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _convert_value(getattr(obj, f.name)) for f in fields(obj)}
    return _convert_value(obj)


def _convert_value(value: Any) -> Any:
    if hasattr(value, "__dataclass_fields__"):
        return model_to_dict(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return [_convert_value(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return _convert_value(value.item())
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [_convert_value(value.real), _convert_value(value.imag)]
    if isinstance(value, dict):
        return {k: _convert_value(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_convert_value(item) for item in value]
    return value
