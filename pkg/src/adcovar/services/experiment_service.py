"""Experiment service: run the configured grid of adiabatic runs.

One run is one (seed, delta_t, level, method) combination. Runs are
independent, each writes its own trajectory file, and the metadata file is
written once after all runs have finished.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from adcovar import __version__
from adcovar.adiabatic import adiabatic_covar_run
from adcovar.baselines import adiabatic_vqe_run, vqe_run
from adcovar.config import ExperimentConfig
from adcovar.covar import resolve_pool_size, shot_budget
from adcovar.errors import AdcovarError, ConfigError, DivergenceError
from adcovar.file_handler import FileSystemHandler
from adcovar.hamiltonians import build_model
from adcovar.models import TRAJECTORY_COLUMNS, Method, Trajectory, model_to_dict
from adcovar.oracle import gap_and_epsilon
from adcovar.pauli import PauliSum
from adcovar.schedule import MorphSchedule
from adcovar.statevector import AnsatzCircuit, hardware_efficient

logger = logging.getLogger(__name__)

METHOD_INDEX: dict[str, int] = {"covar": 0, "adiabatic_vqe": 1, "vqe": 2}
TRACE_COLUMNS = ("step_index", "t", "iteration", "f_norm", "energy")


@dataclass(frozen=True)
class RunSpec:
    """One cell of the experiment grid; delta_t is None for the plain vqe arm."""

    seed: int
    delta_t: float | None
    level: int
    method: Method
    num_layers: int

    @property
    def stem(self) -> str:
        if self.delta_t is None:
            return f"{self.method}_seed{self.seed}_L{self.num_layers}_level{self.level}"
        return (
            f"{self.method}_seed{self.seed}_L{self.num_layers}"
            f"_dt{self.delta_t:g}_level{self.level}"
        )

    @property
    def trajectory_file(self) -> str:
        return f"trajectory_{self.stem}.csv"

    @property
    def trace_file(self) -> str:
        return f"trace_{self.stem}.csv"


def run_rng(
    seed: int, delta_t: float | None, level: int, method: Method, num_layers: int
) -> np.random.Generator:
    """Independent generator for one run.

    Keyed on the step value rather than its position in the config list, so a
    single rerun of one delta_t draws exactly the numbers it drew in a sweep.
    """
    dt_key = 0 if delta_t is None else round(delta_t * 1e9)
    return np.random.default_rng([seed, level, dt_key, METHOD_INDEX[method], num_layers])


def resolve_instance(
    config: ExperimentConfig, seed: int, delta_t: float | None = None
) -> tuple[PauliSum, MorphSchedule]:
    """Target Hamiltonian and schedule of one seeded instance.

    Raises:
        ModelSpecError: If the preset overrides are invalid
        ConfigError: If circuit.num_qubits disagrees with the model
    """
    dt = config.schedule.delta_t[0] if delta_t is None else delta_t
    h, schedule = build_model(
        config.model.preset, config.model.overrides, seed=seed, delta_t=dt
    )
    if config.schedule.kind is not None and config.schedule.kind != schedule.kind:
        schedule = schedule.with_kind(config.schedule.kind)
    expected = config.circuit.num_qubits
    if expected is not None and expected != schedule.num_qubits:
        raise ConfigError(
            f"circuit.num_qubits is {expected} but the {config.model.preset} model "
            f"has {schedule.num_qubits} qubits",
            field="circuit.num_qubits",
        )
    return h, schedule


def check_levels(levels: Sequence[int], num_qubits: int) -> None:
    """Raises ConfigError when a requested level does not exist for num_qubits."""
    too_high = [level for level in levels if level >= 1 << num_qubits]
    if too_high:
        raise ConfigError(
            f"levels {too_high} exceed the {1 << num_qubits} levels of {num_qubits} qubits",
            field="levels",
        )


def build_circuit(
    config: ExperimentConfig, num_qubits: int, num_layers: int | None = None
) -> AnsatzCircuit:
    """Ansatz of the config; num_layers defaults to the first configured depth."""
    layers = config.circuit.num_layers[0] if num_layers is None else num_layers
    return hardware_efficient(num_qubits, layers, config.circuit.entangler)


def plan_runs(config: ExperimentConfig) -> list[RunSpec]:
    """Every run of the config in a fixed order: seed, layers, delta_t, level, method."""
    specs = []
    for seed in config.seeds:
        for layers in config.circuit.num_layers:
            for delta_t in config.schedule.delta_t:
                for level in config.levels:
                    specs.append(RunSpec(seed, delta_t, level, "covar", layers))
                    if config.vqe.enabled:
                        specs.append(RunSpec(seed, delta_t, level, "adiabatic_vqe", layers))
            if config.vqe.enabled:
                specs.extend(
                    RunSpec(seed, None, level, "vqe", layers) for level in config.levels
                )
    return specs


def execute_run(config: ExperimentConfig, spec: RunSpec) -> Trajectory:
    """Run one grid cell and return its trajectory.

    Raises:
        DivergenceError: With the partial trajectory attached
        AdcovarError: For any other per-run failure
    """
    _, schedule = resolve_instance(config, spec.seed, spec.delta_t)
    circuit = build_circuit(config, schedule.num_qubits, spec.num_layers)
    rng = run_rng(spec.seed, spec.delta_t, spec.level, spec.method, spec.num_layers)
    if spec.method == "covar":
        return adiabatic_covar_run(
            schedule, circuit, spec.level, config.solver, use_oracle=config.oracle, rng=rng
        )
    if spec.method == "adiabatic_vqe":
        return adiabatic_vqe_run(
            schedule, circuit, spec.level, config.vqe.config, config.vqe.iterations_per_step,
            final_iterations=config.vqe.final_iterations,
            use_oracle=config.oracle,
            locality=config.solver.locality,
        )
    return vqe_run(
        schedule, circuit, spec.level, config.vqe.config, config.vqe.total_iterations,
        use_oracle=config.oracle,
        locality=config.solver.locality,
        rng=rng,
    )


def write_trajectory(
    handler: FileSystemHandler,
    output_dir: Path,
    spec: RunSpec,
    trajectory: Trajectory,
    *,
    with_trace: bool = False,
) -> str:
    """Write the trajectory CSV (and optionally its trace) and return its name."""
    handler.write_csv(output_dir / spec.trajectory_file, TRAJECTORY_COLUMNS, trajectory.rows())
    if with_trace:
        handler.write_csv(output_dir / spec.trace_file, TRACE_COLUMNS, trajectory.trace_rows())
    return spec.trajectory_file


def _run_entry(
    config: ExperimentConfig,
    spec: RunSpec,
    output_dir: Path,
    handler: FileSystemHandler,
    parameter_counts: dict[int, int],
) -> dict[str, Any]:
    entry: dict[str, Any] = {
        "seed": spec.seed,
        "delta_t": spec.delta_t,
        "level": spec.level,
        "method": spec.method,
        "num_layers": spec.num_layers,
        "num_parameters": parameter_counts[spec.num_layers],
        "status": "ok",
        "file": None,
    }
    trajectory: Trajectory | None = None
    try:
        trajectory = execute_run(config, spec)
    except DivergenceError as e:
        trajectory = e.trajectory
        entry.update(status="diverged", error=str(e), failed_at=e.t)
    except AdcovarError as e:
        entry.update(status="failed", error=str(e), error_code=e.code)
    if entry["status"] != "ok":
        logger.warning("run %s %s: %s", spec.stem, entry["status"], entry["error"])

    if trajectory is not None and trajectory.records:
        entry["file"] = write_trajectory(
            handler, output_dir, spec, trajectory, with_trace=config.write_traces
        )
        final = trajectory.final
        entry.update(
            initial_bits=trajectory.bits_label,
            final_energy=final.energy,
            final_f_norm=final.f_norm,
            final_delta_e=final.delta_e,
            final_level_index=final.level_index,
            total_iterations=trajectory.total_iterations,
        )
    return entry


def _circuit_summary(config: ExperimentConfig, circuit: AnsatzCircuit) -> dict[str, Any]:
    """Parameter count, pool size and shot budget advisory of one depth."""
    pool_size = resolve_pool_size(config.solver, circuit.parameter_count, circuit.num_qubits)
    return {
        "num_layers": circuit.num_layers,
        "num_parameters": circuit.parameter_count,
        "pool_size": pool_size,
        "shot_budget": shot_budget(
            circuit.parameter_count, pool_size, config.solver.covariance_norm_tol
        ),
    }


def _instance_summary(config: ExperimentConfig, seed: int) -> dict[str, Any]:
    _, schedule = resolve_instance(config, seed)
    summary: dict[str, Any] = {"seed": seed, "num_qubits": schedule.num_qubits}
    if not config.oracle:
        return summary
    try:
        summary["gap"] = gap_and_epsilon(schedule, config.gap_grid_points).summary()
    except AdcovarError as e:
        logger.warning("gap scan skipped for seed %d: %s", seed, e)
        summary["gap_error"] = str(e)
    return summary


def run_experiment(
    config: ExperimentConfig,
    output_dir: Path | str | None = None,
    handler: FileSystemHandler | None = None,
) -> dict[str, Any]:
    """Run every (seed, num_layers, delta_t, level, method) cell and write the results.

    Writes one trajectory CSV per run and a metadata.json holding the resolved
    config, per-depth parameter counts and shot budget advisories, per-seed gap
    summaries and the status of every run. A failing run is recorded in the
    metadata and does not stop its siblings.

    Args:
        config: Validated experiment configuration
        output_dir: Target directory, config.output_dir when omitted
        handler: File handler for all writes

    Returns:
        Dictionary with output_dir, metadata_file, runs and failures

    Raises:
        ConfigError: If the config cannot build its model or circuit
        ModelSpecError: If the preset overrides are invalid
    """
    handler = handler or FileSystemHandler()
    output_dir = Path(output_dir if output_dir is not None else config.output_dir)
    started = time.perf_counter()

    # Configuration problems surface once, before anything runs
    _, schedule = resolve_instance(config, config.seeds[0])
    check_levels(config.levels, schedule.num_qubits)
    circuits = [
        _circuit_summary(config, build_circuit(config, schedule.num_qubits, layers))
        for layers in config.circuit.num_layers
    ]
    parameter_counts = {c["num_layers"]: c["num_parameters"] for c in circuits}

    specs = plan_runs(config)
    logger.info("running %d runs with %d worker(s)", len(specs), config.workers)

    def run_one(spec: RunSpec) -> dict[str, Any]:
        return _run_entry(config, spec, output_dir, handler, parameter_counts)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            entries = list(pool.map(run_one, specs))
    else:
        entries = [run_one(s) for s in specs]

    failures = sum(1 for entry in entries if entry["status"] != "ok")
    metadata = {
        "name": config.name,
        "version": __version__,
        "config": config.model_dump(mode="json"),
        "num_qubits": schedule.num_qubits,
        "circuits": circuits,
        "instances": [_instance_summary(config, seed) for seed in config.seeds],
        "runs": model_to_dict(entries),
        "failures": failures,
        "wall_time_seconds": time.perf_counter() - started,
    }
    metadata_file = output_dir / "metadata.json"
    handler.write_json(metadata_file, model_to_dict(metadata))
    logger.info(
        "%d runs finished, %d failed; metadata in %s", len(entries), failures, metadata_file
    )
    return {
        "output_dir": str(output_dir),
        "metadata_file": str(metadata_file),
        "runs": model_to_dict(entries),
        "failures": failures,
    }
