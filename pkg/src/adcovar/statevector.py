"""Parameterized ansatz circuits on a dense statevector.

Circuits are sequences of single-qubit rotations R_P(theta) = exp(-i theta P / 2)
with P in {X, Y, Z}, plus parameter-free CZ gates. Each parameter drives exactly
one rotation, which is what makes the closed-form shift rule and the reverse
sweep below exact.

Gates act on amplitude arrays whose last axis is the 2^N basis, so the same
code transforms a single state or a batch of them.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np

from adcovar.errors import DimensionError, ParameterIndexError
from adcovar.pauli import (
    PauliString,
    PauliSum,
    apply_pauli_string,
    apply_pauli_sum,
    basis_indices,
    expectation,
)
from adcovar.state import StateVector, bits_to_index

GateKind = Literal["rx", "ry", "rz", "cz"]
Entangler = Literal["ring", "chain", "none", "custom"]
JacobianMode = Literal["reverse_sweep", "parameter_shift"]

_GENERATOR_LETTER = {"rx": "X", "ry": "Y", "rz": "Z"}


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    Attributes:
        kind: "rx", "ry", "rz" or "cz"
        qubits: Target qubit(s); two distinct qubits for "cz"
        param: Parameter index driving a rotation, None for "cz"
        layer: Layer the gate belongs to (informational for custom circuits)
    """

    kind: GateKind
    qubits: tuple[int, ...]
    param: int | None = None
    layer: int = 0

    @property
    def is_parameterized(self) -> bool:
        return self.param is not None


def entangler_edges(num_qubits: int, entangler: Entangler) -> list[tuple[int, int]]:
    """CZ pairs of one entangling block.

    A ring on two qubits collapses to a single edge; "none" has no edges.
    """
    if entangler == "none" or num_qubits < 2:
        return []
    if entangler == "chain" or num_qubits == 2:
        return [(q, q + 1) for q in range(num_qubits - 1)]
    if entangler == "ring":
        return [(q, (q + 1) % num_qubits) for q in range(num_qubits)]
    raise ValueError(f"Unknown entangler {entangler!r}")


@dataclass(frozen=True, eq=False)
class AnsatzCircuit:
    """Fixed gate layout with nu trainable angles.

    Attributes:
        num_qubits: Number of qubits N
        num_layers: Number of layers L
        gates: Gates in application order
        entangler: Entangling pattern name, "custom" for from_gates circuits
    """

    num_qubits: int
    num_layers: int
    gates: tuple[Gate, ...]
    entangler: Entangler = "custom"

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise DimensionError(f"Circuit needs at least one qubit, got {self.num_qubits}")
        params = []
        for gate in self.gates:
            if any(not 0 <= q < self.num_qubits for q in gate.qubits):
                raise DimensionError(
                    f"Gate {gate} addresses a qubit outside 0..{self.num_qubits - 1}"
                )
            if gate.kind == "cz":
                if len(gate.qubits) != 2 or gate.qubits[0] == gate.qubits[1]:
                    raise ValueError(f"CZ needs two distinct qubits, got {gate.qubits}")
                if gate.param is not None:
                    raise ValueError("CZ gates take no parameter")
            elif gate.kind in _GENERATOR_LETTER:
                if len(gate.qubits) != 1 or gate.param is None:
                    raise ValueError(f"Rotation {gate.kind} needs one qubit and a parameter")
                params.append(gate.param)
            else:
                raise ValueError(f"Unknown gate kind {gate.kind!r}")
        if sorted(params) != list(range(len(params))):
            raise ValueError("Each parameter index 0..nu-1 must drive exactly one rotation")

    @classmethod
    def from_gates(cls, num_qubits: int, gates: Sequence[Gate]) -> AnsatzCircuit:
        layers = {gate.layer for gate in gates}
        return cls(num_qubits, max(layers) + 1 if layers else 0, tuple(gates), "custom")

    @cached_property
    def parameter_count(self) -> int:
        return sum(1 for gate in self.gates if gate.is_parameterized)

    @cached_property
    def generators(self) -> tuple[PauliString, ...]:
        """Rotation generator of each parameter, indexed by parameter."""
        by_param: dict[int, PauliString] = {}
        for gate in self.gates:
            if gate.param is not None:
                by_param[gate.param] = PauliString.from_sites(
                    self.num_qubits, {gate.qubits[0]: _GENERATOR_LETTER[gate.kind]}
                )
        return tuple(by_param[i] for i in range(len(by_param)))

    def rotation_parameter(self, layer: int, kind: GateKind, qubit: int) -> int | None:
        """Parameter index of the `kind` rotation on `qubit` in `layer`, if any."""
        for gate in self.gates:
            if gate.layer == layer and gate.kind == kind and gate.qubits == (qubit,):
                return gate.param
        return None

    @property
    def has_entanglers(self) -> bool:
        return any(gate.kind == "cz" for gate in self.gates)

    def descriptor(self) -> dict[str, int | str]:
        return {
            "num_qubits": self.num_qubits,
            "num_layers": self.num_layers,
            "entangler": self.entangler,
            "num_parameters": self.parameter_count,
        }


def hardware_efficient(
    num_qubits: int, num_layers: int, entangler: Entangler = "ring"
) -> AnsatzCircuit:
    """Ry on every qubit, then Rz on every qubit, then a CZ block, repeated L times.

    Parameter 2*N*l + q drives Ry on qubit q in layer l and 2*N*l + N + q drives
    the matching Rz, so nu = 2*N*L.
    """
    if num_layers < 1:
        raise ValueError(f"num_layers must be >= 1, got {num_layers}")
    edges = entangler_edges(num_qubits, entangler)
    gates: list[Gate] = []
    param = 0
    for layer in range(num_layers):
        for kind in ("ry", "rz"):
            for qubit in range(num_qubits):
                gates.append(Gate(kind, (qubit,), param, layer))
                param += 1
        gates.extend(Gate("cz", edge, None, layer) for edge in edges)
    return AnsatzCircuit(num_qubits, num_layers, tuple(gates), entangler)


# Gate kernels


def rotation_matrix(kind: GateKind, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind == "ry":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == "rz":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=np.complex128)
    raise ValueError(f"No rotation matrix for gate kind {kind!r}")


def apply_single_qubit(amps: np.ndarray, matrix: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 matrix to `qubit` of every row of amps."""
    stride = 1 << qubit
    view = amps.reshape(amps.shape[:-1] + (-1, 2, stride))
    return np.einsum("ij,...ajb->...aib", matrix, view).reshape(amps.shape)


@lru_cache(maxsize=256)
def _bit_mask(num_qubits: int, qubit: int) -> np.ndarray:
    mask = ((basis_indices(num_qubits) >> qubit) & 1).astype(bool)
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=256)
def _cz_signs(num_qubits: int, a: int, b: int) -> np.ndarray:
    signs = np.where(_bit_mask(num_qubits, a) & _bit_mask(num_qubits, b), -1.0, 1.0)
    signs.flags.writeable = False
    return signs


def apply_gate(gate: Gate, angle: float, amps: np.ndarray, num_qubits: int) -> np.ndarray:
    if gate.kind == "cz":
        return amps * _cz_signs(num_qubits, *gate.qubits)
    if gate.kind == "rz":
        phase = np.exp(0.5j * angle)
        return amps * np.where(_bit_mask(num_qubits, gate.qubits[0]), phase, phase.conjugate())
    return apply_single_qubit(amps, rotation_matrix(gate.kind, angle), gate.qubits[0])


def check_theta(circuit: AnsatzCircuit, theta: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return theta as a fresh float64 vector of length nu."""
    values = np.array(theta, dtype=np.float64)
    if values.shape != (circuit.parameter_count,):
        raise DimensionError(
            f"Expected {circuit.parameter_count} parameters, got shape {values.shape}"
        )
    return values


def run_circuit(
    circuit: AnsatzCircuit,
    theta: np.ndarray,
    initial_bits: Sequence[int] | str | None = None,
) -> np.ndarray:
    """Amplitudes of U(theta)|initial_bits>, theta assumed validated."""
    n = circuit.num_qubits
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0 if initial_bits is None else bits_to_index(initial_bits, n)] = 1.0
    for gate in circuit.gates:
        angle = theta[gate.param] if gate.param is not None else 0.0
        amps = apply_gate(gate, angle, amps, n)
    return amps


def build_ansatz_state(
    circuit: AnsatzCircuit,
    theta: Sequence[float] | np.ndarray,
    initial_bits: Sequence[int] | str | None = None,
) -> StateVector:
    """Prepare U(theta)|initial_bits> (|0...0> when no bits are given).

    Raises:
        DimensionError: If len(theta) != nu or the bit pattern has the wrong length
    """
    values = check_theta(circuit, theta)
    return StateVector(run_circuit(circuit, values, initial_bits), circuit.num_qubits)


def param_shift_derivative(
    circuit: AnsatzCircuit,
    theta: Sequence[float] | np.ndarray,
    index: int,
    observable: PauliString | PauliSum,
    initial_bits: Sequence[int] | str | None = None,
) -> float:
    """d<P>/d theta_l from two evaluations at theta_l +- pi/2.

    Raises:
        ParameterIndexError: If index is outside 0..nu-1
    """
    values = check_theta(circuit, theta)
    if not 0 <= index < circuit.parameter_count:
        raise ParameterIndexError(
            f"Parameter index {index} outside 0..{circuit.parameter_count - 1}"
        )
    if isinstance(observable, PauliString):
        observable = PauliSum.from_string(observable)
    shifted = []
    for shift in (math.pi / 2, -math.pi / 2):
        moved = values.copy()
        moved[index] += shift
        shifted.append(expectation(observable, run_circuit(circuit, moved, initial_bits)).real)
    return 0.5 * (shifted[0] - shifted[1])


def reverse_sweep(
    circuit: AnsatzCircuit,
    theta: Sequence[float] | np.ndarray,
    bras: np.ndarray,
    initial_bits: Sequence[int] | str | None = None,
    state: np.ndarray | None = None,
) -> np.ndarray:
    """Overlaps of fixed vectors with every generator-inserted state.

    For parameter l with generator P_l, let eta_l be the circuit state with P_l
    inserted right after rotation l. Row b of the result holds <bras[b]|eta_l>
    for all l, gathered in one backward pass over the gates. Because
    R(theta +- pi/2) = (1 -+ i P) / sqrt(2), every shift-rule derivative of an
    expectation value is a combination of such overlaps; for Hermitian A,
    d<A>/d theta_l = Im <A psi|eta_l>.

    Args:
        circuit: The ansatz
        theta: Parameter vector
        bras: Array of shape (B, 2^N) (or (2^N,)) of vectors defined at the output
        initial_bits: Input basis state
        state: Precomputed U(theta)|initial_bits>, recomputed when None

    Returns:
        Complex array of shape (B, nu)
    """
    values = check_theta(circuit, theta)
    n = circuit.num_qubits
    ket = run_circuit(circuit, values, initial_bits) if state is None else np.array(state)
    rows = np.array(bras, dtype=np.complex128, ndmin=2)
    if rows.shape[-1] != 1 << n or ket.shape != (1 << n,):
        raise DimensionError(f"Vectors must have length {1 << n}")
    overlaps = np.zeros((rows.shape[0], circuit.parameter_count), dtype=np.complex128)
    generators = circuit.generators
    for gate in reversed(circuit.gates):
        if gate.param is None:
            ket = apply_gate(gate, 0.0, ket, n)
            rows = apply_gate(gate, 0.0, rows, n)
            continue
        generated = apply_pauli_string(generators[gate.param], ket)
        overlaps[:, gate.param] = rows.conj() @ generated
        angle = -values[gate.param]
        ket = apply_gate(gate, angle, ket, n)
        rows = apply_gate(gate, angle, rows, n)
    return overlaps


def energy_and_gradient(
    h: PauliSum,
    circuit: AnsatzCircuit,
    theta: Sequence[float] | np.ndarray,
    initial_bits: Sequence[int] | str | None = None,
    mode: JacobianMode = "reverse_sweep",
) -> tuple[float, np.ndarray]:
    """Return (<H>, d<H>/d theta) at theta."""
    values = check_theta(circuit, theta)
    if h.num_qubits != circuit.num_qubits:
        raise DimensionError(
            f"Hamiltonian has {h.num_qubits} qubits, circuit has {circuit.num_qubits}"
        )
    amps = run_circuit(circuit, values, initial_bits)
    h_amps = apply_pauli_sum(h, amps)
    energy = float(np.vdot(amps, h_amps).real)
    if mode == "parameter_shift":
        gradient = np.array([
            param_shift_derivative(circuit, values, index, h, initial_bits)
            for index in range(circuit.parameter_count)
        ])
    else:
        gradient = reverse_sweep(circuit, values, h_amps, initial_bits, state=amps)[0].imag
    return energy, gradient

