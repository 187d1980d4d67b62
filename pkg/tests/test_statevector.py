"""Tests for statevectors, ansatz circuits and circuit derivatives."""

import math

import numpy as np
import pytest

from adcovar.errors import DimensionError, NormalizationError, ParameterIndexError
from adcovar.pauli import PauliString, PauliSum, expectation
from adcovar.state import StateVector, bits_to_index, index_to_bits
from adcovar.statevector import (
    AnsatzCircuit,
    Gate,
    build_ansatz_state,
    energy_and_gradient,
    entangler_edges,
    hardware_efficient,
    param_shift_derivative,
    reverse_sweep,
    run_circuit,
)


def finite_difference(fn, theta: np.ndarray, step: float = 1e-6) -> np.ndarray:
    grads = []
    for index in range(theta.size):
        plus, minus = theta.copy(), theta.copy()
        plus[index] += step
        minus[index] -= step
        grads.append((fn(plus) - fn(minus)) / (2 * step))
    return np.array(grads)


def random_hamiltonian(rng: np.random.Generator, n: int, terms: int = 6) -> PauliSum:
    labels = ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(terms)]
    return PauliSum.from_terms(n, [(rng.normal(), label) for label in labels])


# =============================================================================
# StateVector
# =============================================================================


class TestStateVector:
    """Construction and validation of StateVector."""

    def test_bits_are_little_endian(self):
        assert bits_to_index([1, 0, 0], 3) == 1
        assert bits_to_index("001", 3) == 4
        assert index_to_bits(6, 3) == (0, 1, 1)

    def test_bits_length_mismatch(self):
        with pytest.raises(DimensionError):
            bits_to_index([1, 0], 3)

    def test_bits_must_be_binary(self):
        with pytest.raises(ValueError):
            bits_to_index([2, 0], 2)

    def test_basis_state(self):
        state = StateVector.basis(2, "01")
        assert state.probabilities()[2] == 1.0

    def test_rejects_unnormalized(self):
        with pytest.raises(NormalizationError):
            StateVector(np.array([1.0, 1.0]), 1)

    def test_rejects_wrong_length(self):
        with pytest.raises(DimensionError):
            StateVector(np.array([1.0, 0.0, 0.0]), 1)

    def test_from_amplitudes_infers_qubits(self):
        state = StateVector.from_amplitudes(np.eye(8)[3])
        assert state.num_qubits == 3

    def test_from_amplitudes_rejects_non_power_of_two(self):
        with pytest.raises(DimensionError):
            StateVector.from_amplitudes([1.0, 0.0, 0.0])

    def test_amplitudes_are_read_only_copies(self):
        source = np.array([1.0, 0.0], dtype=complex)
        state = StateVector(source, 1)
        source[0] = 0.0
        assert state.amplitudes[0] == 1.0
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.5

    def test_fidelity(self):
        plus = StateVector(np.array([1, 1]) / math.sqrt(2), 1)
        assert plus.fidelity(StateVector.basis(1)) == pytest.approx(0.5)


# =============================================================================
# Circuits
# =============================================================================


class TestHardwareEfficient:
    """Layout of the hardware-efficient ansatz."""

    def test_parameter_count(self):
        circuit = hardware_efficient(4, 3)
        assert circuit.parameter_count == 2 * 4 * 3

    def test_parameter_index_layout(self):
        circuit = hardware_efficient(3, 2)
        assert circuit.rotation_parameter(1, "ry", 2) == 2 * 3 * 1 + 2
        assert circuit.rotation_parameter(1, "rz", 0) == 2 * 3 * 1 + 3
        assert circuit.rotation_parameter(0, "rx", 0) is None

    def test_generators_follow_gate_kind(self):
        circuit = hardware_efficient(2, 1)
        assert [g.label for g in circuit.generators] == ["YI", "IY", "ZI", "IZ"]

    def test_ring_edges(self):
        assert entangler_edges(3, "ring") == [(0, 1), (1, 2), (2, 0)]
        assert entangler_edges(2, "ring") == [(0, 1)]
        assert entangler_edges(1, "ring") == []
        assert entangler_edges(4, "chain") == [(0, 1), (1, 2), (2, 3)]

    def test_zero_layers_rejected(self):
        with pytest.raises(ValueError):
            hardware_efficient(2, 0)

    def test_zero_angles_give_input_state(self):
        """All rotations at zero and CZ on a basis state leave |bits> up to sign."""
        circuit = hardware_efficient(3, 2)
        amps = run_circuit(circuit, np.zeros(circuit.parameter_count), (1, 0, 1))
        assert abs(amps[bits_to_index((1, 0, 1), 3)]) == pytest.approx(1.0)

    def test_descriptor(self):
        assert hardware_efficient(2, 3, "chain").descriptor() == {
            "num_qubits": 2,
            "num_layers": 3,
            "entangler": "chain",
            "num_parameters": 12,
        }


class TestCustomCircuits:
    """Validation of hand-built circuits."""

    def test_parameters_must_be_a_permutation(self):
        with pytest.raises(ValueError, match="exactly one rotation"):
            AnsatzCircuit.from_gates(1, [Gate("ry", (0,), 0), Gate("rz", (0,), 0)])

    def test_cz_needs_distinct_qubits(self):
        with pytest.raises(ValueError):
            AnsatzCircuit.from_gates(2, [Gate("cz", (1, 1))])

    def test_qubit_out_of_range(self):
        with pytest.raises(DimensionError):
            AnsatzCircuit.from_gates(1, [Gate("rx", (1,), 0)])

    def test_rx_rotation(self):
        """Rx(pi)|0> = -i|1>."""
        circuit = AnsatzCircuit.from_gates(1, [Gate("rx", (0,), 0)])
        amps = run_circuit(circuit, np.array([math.pi]))
        np.testing.assert_allclose(amps, [0, -1j], atol=1e-12)


class TestBuildAnsatzState:
    """build_ansatz_state results."""

    def test_ry_prepares_cos_sin(self):
        circuit = hardware_efficient(1, 1)
        state = build_ansatz_state(circuit, [math.pi / 3, 0.0])
        np.testing.assert_allclose(
            state.amplitudes, [math.cos(math.pi / 6), math.sin(math.pi / 6)], atol=1e-12
        )

    def test_wrong_parameter_length(self):
        with pytest.raises(DimensionError):
            build_ansatz_state(hardware_efficient(2, 1), [0.0])

    def test_state_is_normalized(self):
        rng = np.random.default_rng(0)
        circuit = hardware_efficient(4, 3)
        state = build_ansatz_state(circuit, rng.uniform(-math.pi, math.pi, 24))
        assert np.linalg.norm(state.amplitudes) == pytest.approx(1.0, abs=1e-12)


# =============================================================================
# Derivatives
# =============================================================================


class TestDerivatives:
    """Shift-rule and reverse-sweep derivatives against finite differences."""

    def test_single_qubit_shift_rule(self):
        """d<Z>/d theta of Ry(theta)|0> is -sin(theta)."""
        circuit = hardware_efficient(1, 1)
        theta = np.array([0.7, 0.0])
        derivative = param_shift_derivative(circuit, theta, 0, PauliString.from_label("Z"))
        assert derivative == pytest.approx(-math.sin(0.7), abs=1e-12)

    def test_index_out_of_range(self):
        circuit = hardware_efficient(1, 1)
        with pytest.raises(ParameterIndexError):
            param_shift_derivative(circuit, np.zeros(2), 2, PauliString.from_label("Z"))

    @pytest.mark.parametrize("mode", ["reverse_sweep", "parameter_shift"])
    def test_gradient_matches_finite_difference(self, mode):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            circuit = hardware_efficient(n, int(rng.integers(1, 3)), "ring")
            h = random_hamiltonian(rng, n)
            theta = rng.uniform(-math.pi, math.pi, circuit.parameter_count)
            bits = tuple(int(b) for b in rng.integers(0, 2, n))

            def energy(values, h=h, circuit=circuit, bits=bits):
                return expectation(h, run_circuit(circuit, values, bits)).real

            _, gradient = energy_and_gradient(h, circuit, theta, bits, mode)
            np.testing.assert_allclose(gradient, finite_difference(energy, theta), atol=1e-6)

    def test_reverse_sweep_matches_shift_rule_per_parameter(self):
        rng = np.random.default_rng(5)
        circuit = hardware_efficient(3, 2)
        theta = rng.uniform(-math.pi, math.pi, circuit.parameter_count)
        h = random_hamiltonian(rng, 3)
        _, gradient = energy_and_gradient(h, circuit, theta)
        for index in range(circuit.parameter_count):
            assert gradient[index] == pytest.approx(
                param_shift_derivative(circuit, theta, index, h), abs=1e-10
            )

    def test_reverse_sweep_shape(self):
        circuit = hardware_efficient(2, 1)
        bras = np.ones((3, 4), dtype=complex)
        assert reverse_sweep(circuit, np.zeros(4), bras).shape == (3, 4)

    def test_reverse_sweep_rejects_wrong_bra_length(self):
        circuit = hardware_efficient(2, 1)
        with pytest.raises(DimensionError):
            reverse_sweep(circuit, np.zeros(4), np.ones(8))

    def test_hamiltonian_size_mismatch(self):
        with pytest.raises(DimensionError):
            energy_and_gradient(
                PauliSum.from_terms(3, [(1.0, "ZZZ")]), hardware_efficient(2, 1), np.zeros(4)
            )
