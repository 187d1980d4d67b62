"""Classical-shadow estimation of Pauli expectation values.

Each shot measures every qubit in a uniformly random X, Y or Z basis. For a
Pauli string P, the single-shot estimate is the product over its support of
3 * (-1)^outcome when the measured basis matches the letter, and 0 otherwise;
the mean over shots is unbiased for <P>.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from adcovar.errors import DimensionError
from adcovar.pauli import PauliString
from adcovar.state import StateVector
from adcovar.statevector import apply_single_qubit

logger = logging.getLogger(__name__)

# Basis codes: 0 = X, 1 = Y, 2 = Z
_BASIS_CODE = {"X": 0, "Y": 1, "Z": 2}
_SQRT_HALF = 1 / math.sqrt(2)
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT_HALF
# H S^dagger maps the Y eigenbasis onto the computational basis
_Y_TO_Z = _HADAMARD @ np.diag([1, -1j])
_ROTATIONS = {0: _HADAMARD, 1: _Y_TO_Z}


def _rotated_probabilities(amps: np.ndarray, bases: np.ndarray) -> np.ndarray:
    rotated = amps
    for qubit, basis in enumerate(bases):
        if basis != 2:
            rotated = apply_single_qubit(rotated, _ROTATIONS[int(basis)], qubit)
    probs = np.abs(rotated) ** 2
    return probs / probs.sum()


def sample_shadow(
    state: StateVector, shots: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw random measurement bases and outcomes.

    Shots that share a basis pattern are sampled together, patterns in
    ascending order, so a seeded generator reproduces the snapshot exactly.

    Returns:
        (bases, outcomes), both int arrays of shape (shots, N)
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    n = state.num_qubits
    bases = rng.integers(0, 3, size=(shots, n))
    pattern_ids = bases @ (3 ** np.arange(n, dtype=np.int64))
    outcomes = np.zeros((shots, n), dtype=np.int64)
    patterns = np.unique(pattern_ids)
    for pattern in patterns:
        rows = np.flatnonzero(pattern_ids == pattern)
        probs = _rotated_probabilities(state.amplitudes, bases[rows[0]])
        samples = rng.choice(probs.size, size=rows.size, p=probs)
        outcomes[rows] = (samples[:, None] >> np.arange(n)) & 1
    logger.debug("sampled %d shadow shots over %d basis patterns", shots, patterns.size)
    return bases, outcomes


def estimate_from_shadow(
    bases: np.ndarray, outcomes: np.ndarray, observable: PauliString
) -> float:
    estimate = np.ones(bases.shape[0])
    for qubit in observable.support:
        code = _BASIS_CODE[observable.letter(qubit)]
        matched = bases[:, qubit] == code
        estimate = estimate * np.where(matched, 3.0 * (1 - 2 * outcomes[:, qubit]), 0.0)
    return float(estimate.mean())


def shadow_estimate_expectations(
    state: StateVector,
    observables: Sequence[PauliString],
    shots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Estimate <P> for every observable from one shared snapshot set.

    The identity string always estimates to exactly 1.

    Raises:
        DimensionError: If an observable does not act on the state's qubits
        ValueError: If shots < 1
    """
    for observable in observables:
        if observable.num_qubits != state.num_qubits:
            raise DimensionError(
                f"Observable {observable} does not act on {state.num_qubits} qubits"
            )
    bases, outcomes = sample_shadow(state, shots, rng)
    return np.array([estimate_from_shadow(bases, outcomes, p) for p in observables])
