"""Tests for classical-shadow estimation."""

import math

import numpy as np
import pytest

from adcovar.errors import DimensionError
from adcovar.pauli import PauliString, PauliSum, expectation
from adcovar.shadows import estimate_from_shadow, sample_shadow, shadow_estimate_expectations
from adcovar.state import StateVector
from adcovar.statevector import build_ansatz_state, hardware_efficient


def test_identity_estimates_one():
    state = StateVector.basis(2)
    estimates = shadow_estimate_expectations(
        state, [PauliString.identity(2)], 10, np.random.default_rng(0)
    )
    assert estimates[0] == 1.0


def test_z_on_basis_state():
    """Z-basis shots of |1> always read 1, so <Z> estimates to -1 on average."""
    state = StateVector.basis(1, [1])
    bases, outcomes = sample_shadow(state, 3000, np.random.default_rng(1))
    assert np.all(outcomes[bases[:, 0] == 2] == 1)
    estimate = estimate_from_shadow(bases, outcomes, PauliString.from_label("Z"))
    assert estimate == pytest.approx(-1.0, abs=0.15)


def test_y_basis_eigenstate():
    """|+i> measured in the Y basis always reads 0."""
    state = StateVector(np.array([1, 1j]) / math.sqrt(2), 1)
    bases, outcomes = sample_shadow(state, 600, np.random.default_rng(2))
    assert np.all(outcomes[bases[:, 0] == 1] == 0)


def test_estimates_within_statistical_error():
    """Weight-<=2 estimates stay within 5 standard errors of the exact values."""
    rng = np.random.default_rng(3)
    circuit = hardware_efficient(3, 2)
    state = build_ansatz_state(circuit, rng.uniform(-math.pi, math.pi, circuit.parameter_count))
    labels = ["XII", "IYI", "IIZ", "XZI", "IYY", "ZIX"]
    observables = [PauliString.from_label(label) for label in labels]
    shots = 20_000
    estimates = shadow_estimate_expectations(state, observables, shots, rng)
    for observable, estimate in zip(observables, estimates, strict=True):
        exact = expectation(PauliSum.from_string(observable), state).real
        # single-shot variance is at most 3^weight
        bound = 5 * math.sqrt(3**observable.weight / shots)
        assert abs(estimate - exact) < bound


def test_seeded_snapshots_repeat():
    state = StateVector(np.array([0.6, 0.8]), 1)
    a = sample_shadow(state, 50, np.random.default_rng(4))
    b = sample_shadow(state, 50, np.random.default_rng(4))
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_rejects_zero_shots():
    with pytest.raises(ValueError):
        sample_shadow(StateVector.basis(1), 0, np.random.default_rng(0))


def test_rejects_mismatched_observable():
    with pytest.raises(DimensionError):
        shadow_estimate_expectations(
            StateVector.basis(1), [PauliString.from_label("ZZ")], 10, np.random.default_rng(0)
        )
