"""Adiabatic driver: follow an eigenstate of H(t) from t=0 to t=1.

The circuit starts in an exactly prepared eigenstate of H(0). At each later
grid time an inner solver (CoVaR or gradient-descent VQE) is warm-started from
the previous step's final parameters, and the result is recorded with its
energy and, for small systems, its position in the exact spectrum.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from adcovar.covar import (
    LMConfig,
    OperatorPool,
    covar_solve,
    covariance_norm,
    covariance_vector,
    full_operator_pool,
)
from adcovar.errors import DivergenceError, NotAnalyticallySolvableError
from adcovar.models import Method, Trajectory, TrajectoryRecord
from adcovar.oracle import MAX_DENSE_QUBITS, diagonalize, level_index
from adcovar.pauli import PauliSum, diagonal_values, expectation
from adcovar.schedule import MorphSchedule, morph_hamiltonian, time_grid
from adcovar.state import index_to_bits
from adcovar.statevector import AnsatzCircuit, run_circuit

logger = logging.getLogger(__name__)

# Diagonal energies of H0 are enumerated, so keep 2^N manageable
MAX_ENUMERATION_QUBITS = 20
DEGENERACY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class StepOutcome:
    """What an inner solver hands back to the driver."""

    theta: np.ndarray
    iterations: int
    f_norm_trace: tuple[float, ...] = ()
    energy_trace: tuple[float, ...] = ()


# (hamiltonian, theta, initial_bits, step_index, is_final) -> StepOutcome
InnerSolver = Callable[[PauliSum, np.ndarray, tuple[int, ...], int, bool], StepOutcome]


def _x_mixer_fields(h0: PauliSum) -> np.ndarray | None:
    """Per-qubit coefficients when h0 = sum_i c_i X_i, else None."""
    fields = np.zeros(h0.num_qubits)
    for term in h0.terms:
        string = term.string
        if string.z != 0 or string.weight != 1 or term.coefficient.imag != 0.0:
            return None
        fields[string.support[0]] = term.coefficient.real
    return fields if h0.terms else None


def _pattern_energies(h0: PauliSum, fields: np.ndarray | None) -> np.ndarray:
    if fields is None:
        return diagonal_values(h0)
    # Pattern bit q = 1 means qubit q in |+>, 0 means |->
    indices = np.arange(1 << h0.num_qubits)
    energies = np.zeros(indices.size)
    for qubit, c in enumerate(fields):
        energies += c * (2 * ((indices >> qubit) & 1) - 1)
    return energies


def _mixer_layer(circuit: AnsatzCircuit) -> int:
    if not circuit.has_entanglers:
        return max(circuit.num_layers - 1, 0)
    if circuit.entangler not in ("ring", "chain"):
        raise NotAnalyticallySolvableError(
            "X-mixer initialization needs a hardware-efficient circuit"
        )
    if circuit.num_layers < 2:
        raise NotAnalyticallySolvableError(
            "X-mixer initialization needs at least two layers when entanglers are present"
        )
    return circuit.num_layers - 2


def _pattern_parameters(
    circuit: AnsatzCircuit, pattern: int, fields: np.ndarray | None
) -> tuple[np.ndarray, tuple[int, ...]]:
    n = circuit.num_qubits
    theta = np.zeros(circuit.parameter_count)
    if fields is None:
        return theta, index_to_bits(pattern, n)
    layer = _mixer_layer(circuit)
    for qubit in range(n):
        param = circuit.rotation_parameter(layer, "ry", qubit)
        if param is None:
            raise NotAnalyticallySolvableError(
                f"Circuit has no Ry rotation on qubit {qubit} in layer {layer}"
            )
        theta[param] = math.pi / 2 if (pattern >> qubit) & 1 else -math.pi / 2
    return theta, (0,) * n


def init_eigenstate_params(
    schedule: MorphSchedule,
    level: int,
    circuit: AnsatzCircuit,
    *,
    use_oracle: bool = False,
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Exact circuit input for the level-th eigenstate of schedule.h0.

    Supported starting Hamiltonians:

    - diagonal (Z-only) h0: theta0 = 0 and the input bits are the basis state
      with the (level+1)-th smallest energy (ties by basis index)
    - h0 = sum_i c_i X_i: input |0...0>, and the Ry angles of the penultimate
      layer (the only layer without entanglers) are set to -pi/2 for |-> and
      +pi/2 for |+>; the last layer's CZ block undoes the rotated layer's

    When the requested level sits in a degenerate manifold and use_oracle is
    set, the manifold member with the largest overlap with the level-th
    eigenvector of H(delta_t) is chosen instead.

    Raises:
        NotAnalyticallySolvableError: If h0 has neither form or the circuit
            cannot prepare the product state
        ValueError: If level is outside 0..2^N-1
    """
    h0 = schedule.h0
    n = h0.num_qubits
    if n != circuit.num_qubits:
        raise ValueError(f"Schedule has {n} qubits, circuit has {circuit.num_qubits}")
    if n > MAX_ENUMERATION_QUBITS:
        raise NotAnalyticallySolvableError(
            f"Cannot enumerate initial levels beyond {MAX_ENUMERATION_QUBITS} qubits"
        )
    if not 0 <= level < 1 << n:
        raise ValueError(f"level must lie in 0..{(1 << n) - 1}, got {level}")

    fields = None if h0.is_diagonal else _x_mixer_fields(h0)
    if not h0.is_diagonal and fields is None:
        raise NotAnalyticallySolvableError(
            "Initial Hamiltonian must be diagonal or a sum of single-qubit X terms"
        )
    energies = _pattern_energies(h0, fields)
    order = np.argsort(energies, kind="stable")
    pattern = int(order[level])

    manifold = [
        int(p) for p in order
        if abs(energies[p] - energies[pattern]) <= DEGENERACY_TOLERANCE
    ]
    if use_oracle and len(manifold) > 1 and n <= MAX_DENSE_QUBITS:
        pattern = _closest_to_eigenvector(schedule, level, circuit, manifold, fields)
        logger.info("level %d is degenerate at t=0; picked pattern %d via oracle", level, pattern)
    return _pattern_parameters(circuit, pattern, fields)


def _closest_to_eigenvector(schedule, level, circuit, manifold, fields) -> int:
    spectrum = diagonalize(morph_hamiltonian(schedule, schedule.delta_t), with_vectors=True)
    target = spectrum.eigenvectors[:, level]
    best, best_overlap = manifold[0], -1.0
    for candidate in manifold:
        theta, bits = _pattern_parameters(circuit, candidate, fields)
        overlap = abs(np.vdot(target, run_circuit(circuit, theta, bits))) ** 2
        if overlap > best_overlap + 1e-12:
            best, best_overlap = candidate, overlap
    return best


def trajectory_record(
    h: PauliSum,
    t: float,
    step_index: int,
    circuit: AnsatzCircuit,
    theta: np.ndarray,
    initial_bits: Sequence[int],
    *,
    iterations: int,
    norm_pool: OperatorPool,
    use_oracle: bool,
    f_norm_trace: tuple[float, ...] = (),
    energy_trace: tuple[float, ...] = (),
) -> TrajectoryRecord:
    """Evaluate and record the state U(theta)|bits> against H(t)."""
    amps = run_circuit(circuit, theta, initial_bits)
    energy = float(expectation(h, amps).real)
    f_norm = covariance_norm(covariance_vector(norm_pool, h, amps))
    index = delta_e = None
    if use_oracle:
        spectrum = diagonalize(h)
        index = level_index(energy, spectrum)
        delta_e = energy - float(spectrum.eigenvalues[index])
    return TrajectoryRecord(
        t=float(t),
        step_index=step_index,
        theta=theta.copy(),
        energy=energy,
        f_norm=f_norm,
        covar_iters=iterations,
        level_index=index,
        delta_e=delta_e,
        f_norm_trace=f_norm_trace,
        energy_trace=energy_trace,
    )


def run_adiabatic_loop(
    schedule: MorphSchedule,
    circuit: AnsatzCircuit,
    level: int,
    inner: InnerSolver,
    *,
    method: Method,
    use_oracle: bool = False,
    locality: int = 2,
    jitter_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Shared outer loop of the adiabatic methods.

    The t=0 record holds the exact initialization with zero iterations. Each
    later step hands the previous final theta unchanged to `inner` (plus
    Gaussian jitter when jitter_std > 0).

    Raises:
        DivergenceError: With t and the partial trajectory attached
    """
    theta, bits = init_eigenstate_params(schedule, level, circuit, use_oracle=use_oracle)
    oracle_on = use_oracle and schedule.num_qubits <= MAX_DENSE_QUBITS
    if use_oracle and not oracle_on:
        logger.warning(
            "exact oracle skipped: %d qubits exceeds %d", schedule.num_qubits, MAX_DENSE_QUBITS
        )
    if jitter_std > 0 and rng is None:
        rng = np.random.default_rng()
    norm_pool = full_operator_pool(schedule.num_qubits, locality)
    grid = time_grid(schedule.delta_t)
    trajectory = Trajectory(method, level, bits, circuit.parameter_count)

    for step, t in enumerate(grid):
        h_t = morph_hamiltonian(schedule, float(t))
        outcome = StepOutcome(theta, 0)
        if step > 0:
            start = theta
            if jitter_std > 0:
                start = theta + rng.normal(0.0, jitter_std, theta.size)
            try:
                outcome = inner(h_t, start, bits, step, step == len(grid) - 1)
            except DivergenceError as e:
                trajectory.failed_at = float(t)
                trajectory.error = str(e)
                raise DivergenceError(
                    f"{method} diverged at t={t:.6g}: {e}",
                    last_theta=e.last_theta,
                    t=float(t),
                    trajectory=trajectory,
                ) from e
            theta = outcome.theta
        record = trajectory_record(
            h_t, t, step, circuit, theta, bits,
            iterations=outcome.iterations,
            norm_pool=norm_pool,
            use_oracle=oracle_on,
            f_norm_trace=outcome.f_norm_trace,
            energy_trace=outcome.energy_trace,
        )
        trajectory.records.append(record)
        logger.info(
            "%s step %d/%d t=%.4f energy=%.8f iterations=%d",
            method, step, len(grid) - 1, t, record.energy, record.covar_iters,
        )
    return trajectory


def adiabatic_covar_run(
    schedule: MorphSchedule,
    circuit: AnsatzCircuit,
    level: int,
    config: LMConfig,
    *,
    use_oracle: bool = False,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Adiabatic CoVaR: covar_solve at every grid time, warm-started.

    Every step runs at most config.max_iterations updates, the t=1 step at most
    config.final_max_iterations when set. One generator drives pool sampling,
    shot noise and jitter, so a seeded rng reproduces the run exactly.
    """
    rng = rng if rng is not None else np.random.default_rng(config.rng_seed)
    final_cap = config.final_max_iterations or config.max_iterations

    def inner(h, theta, bits, step, is_final):
        result = covar_solve(
            h, circuit, theta, config,
            initial_bits=bits,
            rng=rng,
            max_iterations=final_cap if is_final else config.max_iterations,
        )
        return StepOutcome(
            result.theta,
            result.iterations,
            tuple(float(v) for v in result.f_norms),
            tuple(float(v) for v in result.energies),
        )

    return run_adiabatic_loop(
        schedule, circuit, level, inner,
        method="covar",
        use_oracle=use_oracle,
        locality=config.locality,
        jitter_std=config.jitter_std,
        rng=rng,
    )
