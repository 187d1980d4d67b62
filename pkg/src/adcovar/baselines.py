"""Gradient-descent baselines: VQE, VQD and adiabatic VQE.

All gradients use the same reverse-sweep shift rule as the covariance solver,
so the baselines and CoVaR see identical circuit derivatives.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from adcovar.adiabatic import (
    StepOutcome,
    init_eigenstate_params,
    run_adiabatic_loop,
    trajectory_record,
)
from adcovar.covar import full_operator_pool
from adcovar.errors import DimensionError, DivergenceError
from adcovar.models import Trajectory
from adcovar.oracle import MAX_DENSE_QUBITS
from adcovar.pauli import PauliSum, apply_pauli_sum
from adcovar.schedule import MorphSchedule, morph_hamiltonian
from adcovar.statevector import (
    AnsatzCircuit,
    check_theta,
    energy_and_gradient,
    reverse_sweep,
    run_circuit,
)

logger = logging.getLogger(__name__)


class VqeConfig(BaseModel):
    """Settings of the gradient-descent baselines."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(default=0.1, gt=0.0, description="Gradient step size")
    max_iterations: int = Field(default=200, ge=0, description="Gradient steps per solve")
    gradient_tol: float = Field(
        default=1e-6, ge=0.0, description="Stop when max |gradient| drops to this value"
    )
    rng_seed: int = Field(default=0, description="Seed for the jittered start of the vqe arm")
    jitter_std: float = Field(
        default=0.05, ge=0.0, description="Std of the jittered start of the vqe arm"
    )


@dataclass(frozen=True, eq=False)
class VqeResult:
    """Outcome of a gradient-descent solve.

    Attributes:
        theta: Final parameters
        energies: Cost at the start and after every step
        iterations: Gradient steps taken
        converged: Whether the gradient tolerance was met
    """

    theta: np.ndarray
    energies: np.ndarray
    iterations: int
    converged: bool

    @property
    def energy(self) -> float:
        return float(self.energies[-1])


def _descend(cost_and_gradient, theta: np.ndarray, config: VqeConfig) -> VqeResult:
    energies: list[float] = []
    iterations = 0
    converged = False
    while True:
        cost, gradient = cost_and_gradient(theta)
        if not np.isfinite(cost) or not np.all(np.isfinite(gradient)):
            raise DivergenceError(
                f"Gradient descent hit a non-finite cost after {iterations} steps",
                last_theta=theta.copy(),
            )
        energies.append(cost)
        if np.max(np.abs(gradient), initial=0.0) <= config.gradient_tol:
            converged = True
            break
        if iterations >= config.max_iterations:
            break
        theta = theta - config.learning_rate * gradient
        iterations += 1
    logger.debug("gradient descent: %d steps, cost %.8f", iterations, energies[-1])
    return VqeResult(theta, np.array(energies), iterations, converged)


def vqe_minimize(
    h: PauliSum,
    circuit: AnsatzCircuit,
    theta0: Sequence[float] | np.ndarray,
    config: VqeConfig,
    *,
    initial_bits: Sequence[int] | str | None = None,
) -> VqeResult:
    """Minimize <H> by fixed-step gradient descent.

    Stops when max |d<H>/d theta| <= config.gradient_tol or after
    config.max_iterations steps.

    Raises:
        DimensionError: On parameter or qubit-count mismatch
        DivergenceError: If the energy or gradient becomes non-finite
    """
    if h.num_qubits != circuit.num_qubits:
        raise DimensionError(
            f"Hamiltonian has {h.num_qubits} qubits, circuit has {circuit.num_qubits}"
        )
    theta = check_theta(circuit, theta0)
    return _descend(
        lambda values: energy_and_gradient(h, circuit, values, initial_bits), theta, config
    )


def _prior_states(circuit, prior_thetas, betas, initial_bits) -> list[np.ndarray]:
    if len(prior_thetas) != len(betas):
        raise DimensionError(
            f"Got {len(prior_thetas)} prior parameter vectors but {len(betas)} betas"
        )
    return [run_circuit(circuit, check_theta(circuit, t), initial_bits) for t in prior_thetas]


def vqd_cost(
    h: PauliSum,
    circuit: AnsatzCircuit,
    theta: Sequence[float] | np.ndarray,
    prior_thetas: Sequence[Sequence[float] | np.ndarray],
    betas: Sequence[float],
    *,
    initial_bits: Sequence[int] | str | None = None,
) -> float:
    """<psi|H|psi> + sum_i beta_i |<psi|psi_i>|^2 for previously found states psi_i.

    Raises:
        DimensionError: If a parameter vector has the wrong length or the
            prior and beta lists differ in length
    """
    values = check_theta(circuit, theta)
    priors = _prior_states(circuit, prior_thetas, betas, initial_bits)
    amps = run_circuit(circuit, values, initial_bits)
    cost = float(np.vdot(amps, apply_pauli_sum(h, amps)).real)
    for prior, beta in zip(priors, betas, strict=True):
        cost += beta * abs(np.vdot(amps, prior)) ** 2
    return cost


def vqd_minimize(
    h: PauliSum,
    circuit: AnsatzCircuit,
    theta0: Sequence[float] | np.ndarray,
    prior_thetas: Sequence[Sequence[float] | np.ndarray],
    betas: Sequence[float],
    config: VqeConfig,
    *,
    initial_bits: Sequence[int] | str | None = None,
) -> VqeResult:
    """Gradient descent on vqd_cost.

    The overlap penalty is the expectation of the projector |psi_i><psi_i|, so
    its gradient comes from the same reverse sweep as <H>.
    """
    theta = check_theta(circuit, theta0)
    priors = _prior_states(circuit, prior_thetas, betas, initial_bits)
    weights = np.array(betas, dtype=np.float64)

    def cost_and_gradient(values: np.ndarray) -> tuple[float, np.ndarray]:
        amps = run_circuit(circuit, values, initial_bits)
        h_amps = apply_pauli_sum(h, amps)
        projected = [prior * np.vdot(prior, amps) for prior in priors]
        cost = float(np.vdot(amps, h_amps).real)
        cost += float(
            sum(w * abs(np.vdot(amps, p)) ** 2 for w, p in zip(weights, priors, strict=True))
        )
        bras = np.vstack([h_amps, *projected]) if projected else h_amps[None, :]
        grads = reverse_sweep(circuit, values, bras, initial_bits, state=amps).imag
        return cost, grads[0] + weights @ grads[1:]

    return _descend(cost_and_gradient, theta, config)


def adiabatic_vqe_run(
    schedule: MorphSchedule,
    circuit: AnsatzCircuit,
    level: int,
    config: VqeConfig,
    iterations_per_step: int,
    *,
    final_iterations: int | None = None,
    use_oracle: bool = False,
    locality: int = 2,
) -> Trajectory:
    """Adiabatic VQE: a capped gradient descent on H(t) at every grid time.

    Same grid, initialization and handoff as adiabatic CoVaR; the final step
    may use a larger cap.
    """
    step_config = config.model_copy(update={"max_iterations": iterations_per_step})
    final_config = config.model_copy(
        update={"max_iterations": final_iterations or iterations_per_step}
    )

    def inner(h, theta, bits, step, is_final):
        result = vqe_minimize(
            h, circuit, theta, final_config if is_final else step_config, initial_bits=bits
        )
        return StepOutcome(result.theta, result.iterations, (), tuple(result.energies.tolist()))

    return run_adiabatic_loop(
        schedule, circuit, level, inner,
        method="adiabatic_vqe",
        use_oracle=use_oracle,
        locality=locality,
    )


def vqe_run(
    schedule: MorphSchedule,
    circuit: AnsatzCircuit,
    level: int,
    config: VqeConfig,
    total_iterations: int,
    *,
    use_oracle: bool = False,
    locality: int = 2,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Plain VQE on the target H(1), the comparison arm without morphing.

    Starts from the level's t=0 initialization plus Gaussian jitter drawn from
    rng (seeded with config.rng_seed when omitted) and records a single entry
    at t=1.
    """
    theta0, bits = init_eigenstate_params(schedule, level, circuit)
    rng = rng if rng is not None else np.random.default_rng(config.rng_seed)
    start = theta0 + rng.normal(0.0, config.jitter_std, theta0.size)
    target = morph_hamiltonian(schedule, 1.0)
    result = vqe_minimize(
        target, circuit, start,
        config.model_copy(update={"max_iterations": total_iterations}),
        initial_bits=bits,
    )
    trajectory = Trajectory("vqe", level, bits, circuit.parameter_count)
    trajectory.records.append(
        trajectory_record(
            target, 1.0, 0, circuit, result.theta, bits,
            iterations=result.iterations,
            norm_pool=full_operator_pool(schedule.num_qubits, locality),
            use_oracle=use_oracle and schedule.num_qubits <= MAX_DENSE_QUBITS,
            energy_trace=tuple(result.energies.tolist()),
        )
    )
    return trajectory
