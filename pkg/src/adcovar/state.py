"""Statevector container.

A StateVector is an immutable, normalized array of 2^N complex amplitudes.
Qubit q is bit q of the basis index, so the amplitude of |b_0 b_1 ... b_{N-1}>
lives at index sum(b_q << q).
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from adcovar.errors import DimensionError, NormalizationError

NORM_TOLERANCE = 1e-10


def bits_to_index(bits: Sequence[int] | str, num_qubits: int) -> int:
    """Convert a per-qubit bit pattern to a basis index.

    Args:
        bits: Bits ordered by qubit (element q is qubit q), as ints or a "0101" string
        num_qubits: Expected pattern length

    Returns:
        Basis index with bit q set when qubit q is 1

    Raises:
        DimensionError: If the pattern length differs from num_qubits
        ValueError: If an entry is not 0 or 1
    """
    if isinstance(bits, str):
        bits = [int(b) for b in bits]
    if len(bits) != num_qubits:
        raise DimensionError(
            f"Bit pattern has {len(bits)} entries, expected {num_qubits}"
        )
    index = 0
    for qubit, bit in enumerate(bits):
        if bit not in (0, 1):
            raise ValueError(f"Bit pattern entries must be 0 or 1, got {bit!r}")
        index |= int(bit) << qubit
    return index


def index_to_bits(index: int, num_qubits: int) -> tuple[int, ...]:
    """Inverse of bits_to_index."""
    return tuple((index >> qubit) & 1 for qubit in range(num_qubits))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of num_qubits qubits.

    Attributes:
        amplitudes: Read-only complex array of length 2^num_qubits
        num_qubits: Number of qubits N
    """

    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size != 1 << self.num_qubits:
            raise DimensionError(
                f"Expected {1 << self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"State norm is {norm!r}, expected 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex] | np.ndarray) -> StateVector:
        """Build a state, inferring N from the amplitude count."""
        amps = np.asarray(amplitudes, dtype=np.complex128)
        num_qubits = int(amps.size).bit_length() - 1
        if amps.size == 0 or 1 << num_qubits != amps.size:
            raise DimensionError(f"Amplitude count {amps.size} is not a power of two")
        return cls(amps, num_qubits)

    @classmethod
    def basis(cls, num_qubits: int, bits: Sequence[int] | str | None = None) -> StateVector:
        """Computational basis state |bits> (|0...0> by default)."""
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[0 if bits is None else bits_to_index(bits, num_qubits)] = 1.0
        return cls(amps, num_qubits)

    def inner(self, other: StateVector) -> complex:
        """Return <self|other>."""
        if other.num_qubits != self.num_qubits:
            raise DimensionError(
                f"Cannot overlap {self.num_qubits}-qubit and {other.num_qubits}-qubit states"
            )
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: StateVector) -> float:
        """Return |<self|other>|^2."""
        return abs(self.inner(other)) ** 2

    def probabilities(self) -> np.ndarray:
        """Computational-basis outcome probabilities."""
        return np.abs(self.amplitudes) ** 2
