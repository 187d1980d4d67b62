"""Pydantic models for experiment configuration and error payloads.

An experiment is described by one JSON file validated against ExperimentConfig.
Unknown fields are rejected at every level so a typo never silently falls back
to a default.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from adcovar.baselines import VqeConfig
from adcovar.covar import LMConfig
from adcovar.errors import ConfigError
from adcovar.file_handler import FileReadError, FileSystemHandler

OUTPUT_ROOT_ENV = "ADCOVAR_OUTPUT_ROOT"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _as_list(value: Any) -> Any:
    """Accept a bare number where a list of sweep values is expected."""
    if isinstance(value, int | float):
        return [value]
    return value


class ModelConfig(_Strict):
    """Which Hamiltonian family to build."""

    preset: Literal["spin_ring", "schwinger", "maxcut"] = Field(
        description="Model family preset"
    )
    overrides: dict[str, Any] = Field(
        default_factory=dict, description="Replacement values for preset fields"
    )


class CircuitConfig(_Strict):
    """Hardware-efficient ansatz shape; several layer counts sweep the depth."""

    num_layers: list[int] = Field(
        default_factory=lambda: [10], min_length=1, description="Layer counts L to run"
    )
    entangler: Literal["ring", "chain"] = Field(default="ring", description="CZ pattern")
    num_qubits: int | None = Field(
        default=None, ge=1, description="Must match the model when given"
    )

    @field_validator("num_layers", mode="before")
    @classmethod
    def _scalar_to_list(cls, value: Any) -> Any:
        return _as_list(value)

    @field_validator("num_layers")
    @classmethod
    def _check_layers(cls, values: list[int]) -> list[int]:
        if any(v < 1 for v in values):
            raise ValueError("num_layers must be >= 1")
        if len(set(values)) != len(values):
            raise ValueError("num_layers must not repeat")
        return values


class ScheduleConfig(_Strict):
    """Morphing schedule and step sizes."""

    kind: Literal["mixing", "perturbative"] | None = Field(
        default=None, description="Override the preset's schedule kind"
    )
    delta_t: list[float] = Field(default_factory=lambda: [0.05], min_length=1)

    @field_validator("delta_t", mode="before")
    @classmethod
    def _scalar_to_list(cls, value: Any) -> Any:
        return _as_list(value)

    @field_validator("delta_t")
    @classmethod
    def _check_range(cls, values: list[float]) -> list[float]:
        for value in values:
            if not 0.0 < value <= 1.0:
                raise ValueError(f"delta_t must lie in (0, 1], got {value}")
        return values


class VqeSettings(_Strict):
    """Baseline arms run next to adiabatic CoVaR."""

    enabled: bool = Field(default=False, description="Run the adiabatic VQE and VQE arms")
    config: VqeConfig = Field(default_factory=VqeConfig)
    iterations_per_step: int = Field(default=50, ge=0)
    final_iterations: int | None = Field(default=100, ge=0)
    total_iterations: int = Field(default=1050, ge=0, description="Steps of the plain vqe arm")


class ExperimentConfig(_Strict):
    """Complete description of a batch of runs."""

    name: str = Field(default="experiment", min_length=1)
    model: ModelConfig
    circuit: CircuitConfig = Field(default_factory=CircuitConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    levels: list[int] = Field(default_factory=lambda: [0], min_length=1)
    solver: LMConfig = Field(default_factory=LMConfig)
    vqe: VqeSettings = Field(default_factory=VqeSettings)
    oracle: bool = Field(default=True, description="Record exact level index and delta E")
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    output_dir: str = Field(default="results", min_length=1)
    workers: int = Field(default=1, ge=1, description="Parallel runs")
    gap_grid_points: int = Field(default=201, ge=2)
    write_traces: bool = Field(default=False, description="Also write per-iteration traces")

    @field_validator("levels")
    @classmethod
    def _check_levels(cls, values: list[int]) -> list[int]:
        if any(v < 0 for v in values):
            raise ValueError("levels must be non-negative")
        return values


def config_error_from_validation(error: ValidationError) -> ConfigError:
    """First validation problem as a ConfigError naming the dotted field."""
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"])
    return ConfigError(
        f"Invalid value for '{field}': {first['msg']}",
        field=field,
        details={"errors": len(error.errors())},
    )


def parse_config(data: dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise config_error_from_validation(e) from e


def load_config(path: Path | str, handler: FileSystemHandler | None = None) -> ExperimentConfig:
    """Read and validate an experiment JSON file.

    Raises:
        ConfigError: If the file is unreadable, not JSON, or fails validation
    """
    handler = handler or FileSystemHandler()
    try:
        text = handler.read_file(path)
    except FileReadError as e:
        raise ConfigError(str(e), details={"path": str(path)}) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"Config is not valid JSON: {e.msg} (line {e.lineno})", details={"path": str(path)}
        ) from e
    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object", details={"path": str(path)})
    return parse_config(data)


# ============================================================================
# Error payloads
# ============================================================================


class ErrorDetail(BaseModel):
    """Error detail in error response."""

    code: str = Field(description="Error code (e.g., 'INVALID_CONFIG')")
    message: str = Field(description="Human-readable error message")
    details: dict[str, Any] | None = Field(default=None, description="Additional details")


class ErrorResponse(BaseModel):
    """Standardized error response."""

    error: ErrorDetail
