"""Step-size line search and the step-size versus gap sweep.

The line search tries step sizes from largest to smallest and accepts the
first one whose final energy lands within the target error of the exact
eigenvalue. The sweep repeats this for every seed of a config and pairs the
accepted step with the instance's minimum gap.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from adcovar.adiabatic import adiabatic_covar_run
from adcovar.config import ExperimentConfig
from adcovar.errors import ConfigError, DivergenceError, FitError
from adcovar.file_handler import FileSystemHandler
from adcovar.models import (
    LinesearchAttempt,
    LinesearchResult,
    Trajectory,
    format_float,
    model_to_dict,
)
from adcovar.oracle import diagonalize, gap_and_epsilon
from adcovar.services.experiment_service import (
    RunSpec,
    build_circuit,
    check_levels,
    resolve_instance,
    run_rng,
    write_trajectory,
)
from adcovar.services.scaling_service import fit_inverse_dt_vs_loggap

logger = logging.getLogger(__name__)

DEFAULT_TARGET_ERROR = 1.5e-3
SCALING_COLUMNS = ("seed", "num_layers", "g_min", "dt", "error")


def _check_candidates(candidates: Sequence[float]) -> list[float]:
    values = [float(c) for c in candidates]
    if not values:
        raise ConfigError("dt_candidates must not be empty", field="dt_candidates")
    for value in values:
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"dt candidate {value} outside (0, 1]", field="dt_candidates")
    if any(b >= a for a, b in zip(values, values[1:], strict=False)):
        raise ConfigError("dt_candidates must be strictly descending", field="dt_candidates")
    return values


def dt_linesearch(
    config: ExperimentConfig,
    target_error: float = DEFAULT_TARGET_ERROR,
    dt_candidates: Sequence[float] | None = None,
    *,
    seed: int | None = None,
    level: int | None = None,
    num_layers: int | None = None,
    output_dir: Path | str | None = None,
    handler: FileSystemHandler | None = None,
) -> LinesearchResult:
    """Largest candidate step whose final |E - E_level(H(1))| <= target_error.

    Candidates are tried in the given (descending) order with the same random
    stream a plain run of that step would use, so rerunning the accepted step
    reproduces the acceptance. A diverging candidate counts as rejected. When
    output_dir is given, every attempted trajectory is written there.

    Args:
        config: Experiment configuration (model, circuit, solver)
        target_error: Acceptance threshold on the final energy error
        dt_candidates: Descending steps, config.schedule.delta_t when omitted
        seed: Instance seed, the config's first seed when omitted
        level: Targeted level, the config's first level when omitted
        num_layers: Circuit depth, the config's first depth when omitted

    Raises:
        ConfigError: If the candidates are not strictly descending in (0, 1]
            or target_error is not positive
        CapacityError: If the model is too large for the exact oracle
    """
    if not target_error > 0.0:
        raise ConfigError(
            f"target_error must be positive, got {target_error}", field="target_error"
        )
    candidates = _check_candidates(
        dt_candidates if dt_candidates is not None else config.schedule.delta_t
    )
    seed = config.seeds[0] if seed is None else seed
    level = config.levels[0] if level is None else level
    num_layers = config.circuit.num_layers[0] if num_layers is None else num_layers
    handler = handler or FileSystemHandler()

    _, schedule = resolve_instance(config, seed)
    check_levels([level], schedule.num_qubits)
    exact = float(diagonalize(schedule.target()).eigenvalues[level])
    circuit = build_circuit(config, schedule.num_qubits, num_layers)

    attempts: list[LinesearchAttempt] = []
    for delta_t in candidates:
        spec = RunSpec(seed, delta_t, level, "covar", num_layers)
        trajectory: Trajectory | None
        failure = None
        try:
            trajectory = adiabatic_covar_run(
                schedule.with_delta_t(delta_t), circuit, level, config.solver,
                use_oracle=config.oracle,
                rng=run_rng(seed, delta_t, level, "covar", num_layers),
            )
            error = abs(trajectory.final.energy - exact)
        except DivergenceError as e:
            trajectory, failure, error = e.trajectory, str(e), math.inf
        accepted = error <= target_error
        file = None
        if output_dir is not None and trajectory is not None and trajectory.records:
            file = write_trajectory(handler, Path(output_dir), spec, trajectory)
        attempts.append(LinesearchAttempt(delta_t, error, accepted, file, failure))
        logger.info("seed %d L=%d dt=%g: error %.3e (%s)", seed, num_layers, delta_t, error,
                    "accepted" if accepted else "rejected")
        if accepted:
            break

    best = min(attempt.final_error for attempt in attempts)
    accepted_dt = attempts[-1].delta_t if attempts[-1].accepted else None
    if accepted_dt is None:
        logger.warning("seed %d: no step met %.3e, best error %.3e", seed, target_error, best)
    return LinesearchResult(
        accepted_dt=accepted_dt,
        best_error=best,
        exhausted=accepted_dt is None,
        attempts=attempts,
    )


def sweep_dt(
    config: ExperimentConfig,
    target_error: float = DEFAULT_TARGET_ERROR,
    dt_candidates: Sequence[float] | None = None,
    *,
    output_dir: Path | str | None = None,
    handler: FileSystemHandler | None = None,
) -> dict[str, Any]:
    """Line search for every seed and depth, then fit 1/dt against log(g_min).

    Writes scaling_points.csv (seed, num_layers, g_min, dt, error) and
    linesearch.json. Each configured depth gets its own fit. Exhausted seeds
    keep an empty dt and are left out of the fit, as are degenerate instances
    (g_min = 0).

    Returns:
        Dictionary with output_dir, points_file, results and fits (one entry
        per depth whose fit is None when fewer than two usable points exist)
    """
    handler = handler or FileSystemHandler()
    output_dir = Path(output_dir if output_dir is not None else config.output_dir)
    level = config.levels[0]

    gaps = {}
    for seed in config.seeds:
        _, schedule = resolve_instance(config, seed)
        gaps[seed] = gap_and_epsilon(schedule, config.gap_grid_points).g_min

    results = []
    rows = []
    fits = []
    for num_layers in config.circuit.num_layers:
        usable: list[tuple[float, float]] = []
        for seed in config.seeds:
            g_min = gaps[seed]
            result = dt_linesearch(
                config, target_error, dt_candidates,
                seed=seed, level=level, num_layers=num_layers,
                output_dir=output_dir, handler=handler,
            )
            result.g_min = g_min
            results.append({"seed": seed, "num_layers": num_layers, **model_to_dict(result)})
            rows.append({
                "seed": str(seed),
                "num_layers": str(num_layers),
                "g_min": format_float(g_min),
                "dt": format_float(result.accepted_dt),
                "error": format_float(result.best_error),
            })
            if result.accepted_dt is not None and g_min > 0.0:
                usable.append((g_min, result.accepted_dt))

        fit = None
        if len(usable) >= 2:
            try:
                fit = model_to_dict(fit_inverse_dt_vs_loggap(usable))
            except FitError as e:
                logger.warning("scaling fit for L=%d skipped: %s", num_layers, e)
        fits.append({"num_layers": num_layers, "fit": fit})

    points_file = output_dir / "scaling_points.csv"
    handler.write_csv(points_file, SCALING_COLUMNS, rows)
    summary = {
        "target_error": target_error,
        "level": level,
        "results": results,
        "fits": fits,
    }
    handler.write_json(output_dir / "linesearch.json", summary)
    return {"output_dir": str(output_dir), "points_file": str(points_file), **summary}
