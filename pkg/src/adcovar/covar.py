"""Covariance root finding (CoVaR).

An eigenstate |psi> of H satisfies <O H> - <O><H> = 0 for every operator O.
The solver samples a pool of low-weight Pauli strings O_k, evaluates the
covariances f_k(theta) and their Jacobian J_kl = d f_k / d theta_l, and drives
f to zero with damped Gauss-Newton (Levenberg-Marquardt) steps on the real
stacking [Re f; Im f].
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from adcovar.errors import DimensionError, DivergenceError, EnumerationError, IllConditionedError
from adcovar.pauli import (
    PauliString,
    PauliSum,
    apply_pauli_string,
    apply_pauli_sum,
    expectation,
    pauli_action,
)
from adcovar.shadows import shadow_estimate_expectations
from adcovar.state import StateVector
from adcovar.statevector import (
    AnsatzCircuit,
    JacobianMode,
    check_theta,
    entangler_edges,
    reverse_sweep,
    run_circuit,
)

logger = logging.getLogger(__name__)

_LETTERS = ("X", "Y", "Z")


class LMConfig(BaseModel):
    """Settings of the Levenberg-Marquardt covariance solver."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    damping: float = Field(default=1e-3, ge=0.0, description="LM damping lambda")
    pool_size: int | None = Field(
        default=None, ge=1, description="Operators per pool; None means min(4*nu, full pool)"
    )
    locality: Literal[1, 2] = Field(default=2, description="Maximum Pauli weight in the pool")
    max_iterations: int = Field(default=50, ge=1, description="LM updates per solve (K)")
    final_max_iterations: int | None = Field(
        default=None, ge=1, description="Update cap for the t=1 step of an adiabatic run"
    )
    covariance_norm_tol: float = Field(
        default=2e-3, gt=0.0, description="Stop when ||f||_2 / sqrt(N_c) drops to this value"
    )
    resample_pool: bool = Field(default=True, description="Draw a fresh pool every iteration")
    rng_seed: int = Field(default=0, description="Seed used when no generator is passed in")
    shots: int | None = Field(default=None, ge=1, description="Simulated shots per estimate")
    jitter_std: float = Field(
        default=0.0, ge=0.0, description="Gaussian jitter added to theta at each adiabatic step"
    )
    jacobian_mode: JacobianMode = "reverse_sweep"


@dataclass(frozen=True, eq=False)
class OperatorPool:
    """Distinct non-identity Pauli strings used as covariance test operators."""

    operators: tuple[PauliString, ...]
    num_qubits: int
    locality: int = 2
    seed: int | None = None

    def __post_init__(self) -> None:
        if len(set(self.operators)) != len(self.operators):
            raise ValueError("Operator pool contains duplicate strings")
        for op in self.operators:
            if op.num_qubits != self.num_qubits:
                raise DimensionError(
                    f"Pool operator {op} does not act on {self.num_qubits} qubits"
                )
            if op.is_identity:
                raise ValueError("Operator pool cannot contain the identity")

    def __len__(self) -> int:
        return len(self.operators)

    @property
    def labels(self) -> list[str]:
        return [op.label for op in self.operators]

    @cached_property
    def action_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (sources, phases) of all operators, shape (N_c, 2^N) each."""
        actions = [pauli_action(op) for op in self.operators]
        return np.stack([s for s, _ in actions]), np.stack([p for _, p in actions])

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """Rows O_k |amps>."""
        sources, phases = self.action_table
        return phases * amps[sources]


def enumerate_pool_strings(num_qubits: int, locality: int = 2) -> list[PauliString]:
    """All weight-1 strings, plus weight-2 strings on ring-neighbor pairs.

    Order is qubit-major for weight 1 (X, Y, Z per qubit), then edge-major with
    nine letter pairs per edge.
    """
    strings = [
        PauliString.from_sites(num_qubits, {q: letter})
        for q in range(num_qubits)
        for letter in _LETTERS
    ]
    if locality >= 2:
        strings.extend(
            PauliString.from_sites(num_qubits, {a: la, b: lb})
            for a, b in entangler_edges(num_qubits, "ring")
            for la in _LETTERS
            for lb in _LETTERS
        )
    return strings


def full_operator_pool(num_qubits: int, locality: int = 2) -> OperatorPool:
    return OperatorPool(tuple(enumerate_pool_strings(num_qubits, locality)), num_qubits, locality)


def sample_operator_pool(
    num_qubits: int,
    locality: int,
    pool_size: int,
    rng: np.random.Generator | int,
) -> OperatorPool:
    """Draw pool_size distinct strings uniformly without replacement.

    Chosen strings keep enumeration order. Passing an int seed makes the pool
    reproducible on its own and records the seed on the pool.

    Raises:
        EnumerationError: If pool_size exceeds the enumerable set or is below 1
    """
    candidates = enumerate_pool_strings(num_qubits, locality)
    if not 1 <= pool_size <= len(candidates):
        raise EnumerationError(
            f"Requested {pool_size} operators but only {len(candidates)} "
            f"weight-<={locality} strings exist on {num_qubits} qubits"
        )
    seed = rng if isinstance(rng, int) else None
    generator = np.random.default_rng(rng) if isinstance(rng, int) else rng
    chosen = np.sort(generator.choice(len(candidates), size=pool_size, replace=False))
    return OperatorPool(tuple(candidates[i] for i in chosen), num_qubits, locality, seed)


def resolve_pool_size(config: LMConfig, num_parameters: int, num_qubits: int) -> int:
    if config.pool_size is not None:
        return config.pool_size
    available = len(enumerate_pool_strings(num_qubits, config.locality))
    return max(1, min(4 * num_parameters, available))


@dataclass(frozen=True, eq=False)
class CovarianceSystem:
    """Covariances f and Jacobian J at one parameter point.

    Attributes:
        f: Complex covariances, shape (N_c,)
        jacobian: Complex derivatives, shape (N_c, nu)
        theta: Parameters the system was evaluated at
        energy: Noiseless <H> at theta
        pool: Operators the rows belong to
    """

    f: np.ndarray
    jacobian: np.ndarray
    theta: np.ndarray
    energy: float | None = None
    pool: OperatorPool | None = None

    @property
    def num_covariances(self) -> int:
        return int(self.f.shape[0])

    @property
    def num_parameters(self) -> int:
        return int(self.jacobian.shape[1])

    @property
    def norm(self) -> float:
        return covariance_norm(self.f)


def covariance_norm(f: np.ndarray) -> float:
    """Root-mean-square magnitude ||f||_2 / sqrt(N_c); 0 for an empty vector."""
    values = np.asarray(f)
    if values.size == 0:
        return 0.0
    return float(np.linalg.norm(values) / math.sqrt(values.size))


def product_expansion(o: PauliString, h: PauliSum) -> PauliSum:
    """O H as a complex-weighted Pauli sum, one pauli_multiply per term of H."""
    return PauliSum.from_string(o) @ h


def covariance(o: PauliString, h: PauliSum, state: StateVector) -> complex:
    """<O H> - <O><H> for a single operator, with O H expanded into Pauli strings."""
    if o.num_qubits != h.num_qubits or state.num_qubits != h.num_qubits:
        raise DimensionError("Operator, Hamiltonian and state must share one qubit count")
    e_oh = expectation(product_expansion(o, h), state)
    e_o = np.vdot(state.amplitudes, apply_pauli_string(o, state))
    return complex(e_oh - e_o * expectation(h, state))


def shadow_covariance_vector(
    pool: OperatorPool,
    h: PauliSum,
    state: StateVector,
    shots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Estimate f_k for every pool operator from one set of classical shadows.

    Every O_k H is expanded into Pauli strings and each distinct string among
    the pool, the terms of H and the expansions is estimated once from shared
    snapshots, in sorted order. This is the estimator a device would use; the
    solver loop uses exact statevector overlaps plus the Gaussian shot model.

    Raises:
        DimensionError: If pool, Hamiltonian and state qubit counts differ
    """
    if not (pool.num_qubits == h.num_qubits == state.num_qubits):
        raise DimensionError("Pool, Hamiltonian and state must share one qubit count")
    products = [product_expansion(o, h) for o in pool.operators]
    strings = sorted(
        {term.string for s in (h, *products) for term in s.terms} | set(pool.operators)
    )
    estimates = shadow_estimate_expectations(state, strings, shots, rng)
    values = dict(zip(strings, estimates, strict=True))

    def estimate(s: PauliSum) -> complex:
        return complex(sum(term.coefficient * values[term.string] for term in s.terms))

    e_h = estimate(h).real
    pairs = zip(pool.operators, products, strict=True)
    return np.array([estimate(product) - values[o] * e_h for o, product in pairs])


def _factors(pool: OperatorPool, h: PauliSum, amps: np.ndarray):
    h_amps = apply_pauli_sum(h, amps)
    o_amps = pool.apply(amps)
    e_h = float(np.vdot(amps, h_amps).real)
    e_o = o_amps @ amps.conj()
    e_oh = o_amps.conj() @ h_amps
    return e_h, e_o, e_oh, h_amps, o_amps


def covariance_vector(
    pool: OperatorPool, h: PauliSum, state: StateVector | np.ndarray
) -> np.ndarray:
    """f_k = <O_k H> - <O_k><H> for every pool operator (noiseless)."""
    amps = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
    if amps.shape != (1 << h.num_qubits,) or pool.num_qubits != h.num_qubits:
        raise DimensionError("Pool, Hamiltonian and state must share one qubit count")
    e_h, e_o, e_oh, _, _ = _factors(pool, h, amps)
    return e_oh - e_o * e_h


def assemble_system(
    pool: OperatorPool,
    h: PauliSum,
    circuit: AnsatzCircuit,
    theta: Sequence[float] | np.ndarray,
    initial_bits: Sequence[int] | str | None = None,
    mode: JacobianMode = "reverse_sweep",
) -> CovarianceSystem:
    """Evaluate f and J at theta.

    In "reverse_sweep" mode all shifted expectation values come from one
    backward pass: with eta_l the generator-inserted state,
    d<A>/d theta_l = Im<A psi|eta_l> for Hermitian A and
    d<O H>/d theta_l = (i/2) (conj<O H psi|eta_l> - <H O psi|eta_l>).
    "parameter_shift" evaluates 2*nu shifted circuits explicitly; both agree
    to rounding.

    Raises:
        DimensionError: On qubit-count or parameter-length mismatch
    """
    values = check_theta(circuit, theta)
    if not (pool.num_qubits == h.num_qubits == circuit.num_qubits):
        raise DimensionError(
            f"Pool ({pool.num_qubits}), Hamiltonian ({h.num_qubits}) and circuit "
            f"({circuit.num_qubits}) qubit counts differ"
        )
    if len(pool) == 0:
        raise EnumerationError("Cannot assemble a covariance system from an empty pool")
    amps = run_circuit(circuit, values, initial_bits)
    e_h, e_o, e_oh, h_amps, o_amps = _factors(pool, h, amps)
    f = e_oh - e_o * e_h

    if mode == "parameter_shift":
        jacobian = _shifted_jacobian(pool, h, circuit, values, initial_bits, e_h, e_o)
    else:
        n_c = len(pool)
        oh_amps = pool.apply(h_amps)
        ho_amps = apply_pauli_sum(h, o_amps)
        bras = np.concatenate([h_amps[None, :], o_amps, oh_amps, ho_amps])
        w = reverse_sweep(circuit, values, bras, initial_bits, state=amps)
        d_h = w[0].imag
        d_o = w[1 : 1 + n_c].imag
        d_oh = 0.5j * (w[1 + n_c : 1 + 2 * n_c].conj() - w[1 + 2 * n_c :])
        jacobian = d_oh - d_o * e_h - e_o[:, None] * d_h[None, :]
    return CovarianceSystem(f, jacobian, values, e_h, pool)


def _shifted_jacobian(pool, h, circuit, values, initial_bits, e_h, e_o) -> np.ndarray:
    jacobian = np.zeros((len(pool), circuit.parameter_count), dtype=np.complex128)
    for index in range(circuit.parameter_count):
        shifted = []
        for shift in (math.pi / 2, -math.pi / 2):
            moved = values.copy()
            moved[index] += shift
            shifted.append(_factors(pool, h, run_circuit(circuit, moved, initial_bits))[:3])
        (h_plus, o_plus, oh_plus), (h_minus, o_minus, oh_minus) = shifted
        d_h = 0.5 * (h_plus - h_minus)
        d_o = 0.5 * (o_plus - o_minus)
        d_oh = 0.5 * (oh_plus - oh_minus)
        jacobian[:, index] = d_oh - d_o * e_h - e_o * d_h
    return jacobian


def lm_update(theta: np.ndarray, system: CovarianceSystem, damping: float) -> np.ndarray:
    """One damped Gauss-Newton step: theta - (J^T J + lambda I)^{-1} J^T f.

    J and f are the real stackings [Re; Im]. At damping 0 the rank of J is
    checked before factoring, since Cholesky can succeed on a numerically
    singular J^T J. The normal matrix is factored by Cholesky; a failed
    factorization falls back to the pseudoinverse.

    Raises:
        IllConditionedError: If damping == 0 and J does not have full column rank
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (system.num_parameters,):
        raise DimensionError(
            f"theta has shape {theta.shape}, Jacobian has {system.num_parameters} columns"
        )
    f_real = np.concatenate([system.f.real, system.f.imag])
    j_real = np.vstack([system.jacobian.real, system.jacobian.imag])
    if damping == 0:
        rank = int(np.linalg.matrix_rank(j_real))
        if rank < theta.size:
            raise IllConditionedError(
                f"Jacobian has rank {rank} < {theta.size} parameters; "
                "J^T J is singular, use damping > 0"
            )
    normal = j_real.T @ j_real + damping * np.eye(theta.size)
    rhs = j_real.T @ f_real
    try:
        factor = cho_factor(normal)
        step = cho_solve(factor, rhs)
    except LinAlgError:
        logger.warning("Cholesky factorization failed, falling back to pseudoinverse")
        step = np.linalg.pinv(normal) @ rhs
    return theta - step


def inject_shot_noise(
    system: CovarianceSystem, shots: int | None, rng: np.random.Generator
) -> CovarianceSystem:
    """Add N(0, 1/shots) to Re and Im of every entry of f and J.

    Draw order is Re f, Im f, Re J, Im J, so a seeded generator reproduces the
    same noise. shots=None returns the system unchanged.
    """
    if shots is None:
        return system
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    std = shots**-0.5
    n_c, nu = system.jacobian.shape
    f = system.f + std * (rng.standard_normal(n_c) + 1j * rng.standard_normal(n_c))
    jacobian = system.jacobian + std * (
        rng.standard_normal((n_c, nu)) + 1j * rng.standard_normal((n_c, nu))
    )
    return replace(system, f=f, jacobian=jacobian)


def shot_budget(num_parameters: int, num_covariances: float, precision: float) -> int:
    """Shots for precision epsilon on nu * N_c estimates: ceil(nu ln(N_c) / eps^2), at least 1."""
    if num_parameters <= 0 or num_covariances <= 0 or precision <= 0:
        raise ValueError("shot_budget needs positive nu, N_c and precision")
    return max(1, math.ceil(num_parameters * math.log(num_covariances) / precision**2))


@dataclass(frozen=True, eq=False)
class CovarResult:
    """Outcome of covar_solve.

    f_norms and energies have one entry per evaluated point: the start point
    and the point after each update.
    """

    theta: np.ndarray
    iterations: int
    f_norms: np.ndarray
    energies: np.ndarray
    converged: bool

    @property
    def final_norm(self) -> float:
        return float(self.f_norms[-1])

    def trace_rows(self) -> list[dict[str, float | int]]:
        return [
            {"iteration": i, "f_norm": float(norm), "energy": float(energy)}
            for i, (norm, energy) in enumerate(zip(self.f_norms, self.energies, strict=True))
        ]


def covar_solve(
    h: PauliSum,
    circuit: AnsatzCircuit,
    theta0: Sequence[float] | np.ndarray,
    config: LMConfig,
    *,
    initial_bits: Sequence[int] | str | None = None,
    rng: np.random.Generator | None = None,
    max_iterations: int | None = None,
) -> CovarResult:
    """Drive the pool covariances of U(theta)|initial_bits> to zero.

    Stops when the (possibly noisy) covariance norm is at most
    config.covariance_norm_tol or after max_iterations updates. A start point
    that already meets the tolerance takes zero updates.

    Raises:
        DivergenceError: If an update produces non-finite parameters
        IllConditionedError: From lm_update at zero damping
    """
    theta = check_theta(circuit, theta0)
    rng = rng if rng is not None else np.random.default_rng(config.rng_seed)
    cap = config.max_iterations if max_iterations is None else max_iterations
    pool_size = resolve_pool_size(config, circuit.parameter_count, circuit.num_qubits)

    pool: OperatorPool | None = None
    norms: list[float] = []
    energies: list[float] = []
    iterations = 0
    while True:
        if pool is None or config.resample_pool:
            pool = sample_operator_pool(circuit.num_qubits, config.locality, pool_size, rng)
        system = assemble_system(pool, h, circuit, theta, initial_bits, config.jacobian_mode)
        system = inject_shot_noise(system, config.shots, rng)
        norm = system.norm
        norms.append(norm)
        energies.append(system.energy)
        logger.debug("covar iteration %d: norm=%.3e energy=%.6f", iterations, norm, system.energy)
        if norm <= config.covariance_norm_tol or iterations >= cap:
            break
        updated = lm_update(theta, system, config.damping)
        if not np.all(np.isfinite(updated)):
            raise DivergenceError(
                f"LM update produced non-finite parameters after {iterations} iterations",
                last_theta=theta.copy(),
            )
        theta = updated
        iterations += 1
    return CovarResult(
        theta=theta,
        iterations=iterations,
        f_norms=np.array(norms),
        energies=np.array(energies),
        converged=norms[-1] <= config.covariance_norm_tol,
    )
