"""Pauli-string algebra and matrix-free Pauli-sum Hamiltonians.

A Pauli string on N qubits is stored as two bit masks (x, z): qubit q carries
I, X, Z or Y when bit q of (x, z) is (0, 0), (1, 0), (0, 1) or (1, 1). The
operator is P = i^{popcount(x & z)} X^x Z^z, so Y = iXZ. Words are written
with letter q acting on qubit q, e.g. "XZI" is X on qubit 0 and Z on qubit 1.

Applying P to a statevector never builds a matrix:

    (P s)[j] = i^{popcount(x & z)} * (-1)^{popcount(z & (j ^ x))} * s[j ^ x]

PauliSum canonicalizes on construction: duplicate strings are merged in order
of first appearance and coefficients below COEFFICIENT_CUTOFF are dropped.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from functools import lru_cache
from numbers import Number

import numpy as np

from adcovar.errors import DimensionError
from adcovar.state import StateVector

COEFFICIENT_CUTOFF = 1e-14
HERMITIAN_TOLERANCE = 1e-12

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}
_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)


@lru_cache(maxsize=32)
def basis_indices(num_qubits: int) -> np.ndarray:
    """Read-only array 0..2^N-1."""
    indices = np.arange(1 << num_qubits, dtype=np.int64)
    indices.flags.writeable = False
    return indices


@dataclass(frozen=True, order=True)
class PauliString:
    """A Pauli word over num_qubits qubits.

    Attributes:
        num_qubits: Word length N
        x: X-bit mask
        z: Z-bit mask
    """

    num_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self) -> None:
        if self.num_qubits < 0:
            raise DimensionError(f"num_qubits must be >= 0, got {self.num_qubits}")
        limit = 1 << self.num_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise DimensionError(
                f"Masks x={self.x}, z={self.z} do not fit {self.num_qubits} qubits"
            )

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse a word such as "XIZY" (letter q acts on qubit q)."""
        x = z = 0
        for qubit, letter in enumerate(label.upper()):
            try:
                x_bit, z_bit = _LETTER_BITS[letter]
            except KeyError as e:
                raise ValueError(f"Invalid Pauli letter {letter!r} in {label!r}") from e
            x |= x_bit << qubit
            z |= z_bit << qubit
        return cls(len(label), x, z)

    @classmethod
    def from_sites(cls, num_qubits: int, sites: Mapping[int, str]) -> PauliString:
        """Build a word from {qubit: letter}, identity elsewhere."""
        letters = ["I"] * num_qubits
        for qubit, letter in sites.items():
            if not 0 <= qubit < num_qubits:
                raise DimensionError(f"Qubit {qubit} out of range for {num_qubits} qubits")
            letters[qubit] = letter
        return cls.from_label("".join(letters))

    @classmethod
    def identity(cls, num_qubits: int) -> PauliString:
        return cls(num_qubits)

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.num_qubits))

    def letter(self, qubit: int) -> str:
        return _BITS_LETTER[((self.x >> qubit) & 1, (self.z >> qubit) & 1)]

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.num_qubits) if (mask >> q) & 1)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    def __str__(self) -> str:
        return self.label


def pauli_multiply(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Return (phase, r) with p * q = phase * r and phase in {1, i, -1, -i}.

    Raises:
        DimensionError: If the words have different lengths
    """
    if p.num_qubits != q.num_qubits:
        raise DimensionError(
            f"Cannot multiply {p.num_qubits}-qubit and {q.num_qubits}-qubit Pauli strings"
        )
    x = p.x ^ q.x
    z = p.z ^ q.z
    exponent = (
        (p.x & p.z).bit_count()
        + (q.x & q.z).bit_count()
        - (x & z).bit_count()
        + 2 * (p.z & q.x).bit_count()
    ) % 4
    return _PHASES[exponent], PauliString(p.num_qubits, x, z)


@lru_cache(maxsize=1024)
def _action(num_qubits: int, x: int, z: int) -> tuple[np.ndarray, np.ndarray]:
    source = basis_indices(num_qubits) ^ x
    parity = np.bitwise_count(source & z) & 1
    phase = _PHASES[(x & z).bit_count() % 4]
    phases = np.where(parity == 1, -phase, phase).astype(np.complex128)
    source.flags.writeable = False
    phases.flags.writeable = False
    return source, phases


def pauli_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Gather table of p: (P s)[j] = phases[j] * s[source[j]]."""
    return _action(p.num_qubits, p.x, p.z)


def _amplitudes(state: StateVector | np.ndarray, num_qubits: int) -> np.ndarray:
    if isinstance(state, StateVector):
        if state.num_qubits != num_qubits:
            raise DimensionError(
                f"State has {state.num_qubits} qubits, operator acts on {num_qubits}"
            )
        return state.amplitudes
    amps = np.asarray(state)
    if amps.ndim == 0 or amps.shape[-1] != 1 << num_qubits:
        raise DimensionError(
            f"Expected trailing dimension {1 << num_qubits}, got shape {amps.shape}"
        )
    return amps


def apply_pauli_string(p: PauliString, state: StateVector | np.ndarray) -> np.ndarray:
    """Return the amplitudes of p s as an ndarray, not a StateVector.

    Accepts a StateVector or an amplitude array whose last axis has length 2^N,
    like apply_pauli_sum. Pauli strings are unitary, so the result stays
    normalized.
    """
    amps = _amplitudes(state, p.num_qubits)
    source, phases = pauli_action(p)
    return phases * amps[..., source]


@dataclass(frozen=True)
class PauliTerm:
    coefficient: complex
    string: PauliString

    def __post_init__(self) -> None:
        coefficient = complex(self.coefficient)
        if not np.isfinite(coefficient):
            raise ValueError(f"Non-finite coefficient {coefficient!r} for {self.string}")
        object.__setattr__(self, "coefficient", coefficient)


@dataclass(frozen=True, eq=False)
class PauliSum:
    """Canonical linear combination of Pauli strings on num_qubits qubits.

    Use PauliSum.from_terms for (coefficient, word) pairs; the dataclass
    constructor takes PauliTerm objects directly.
    """

    terms: tuple[PauliTerm, ...]
    num_qubits: int

    def __post_init__(self) -> None:
        merged: dict[PauliString, complex] = {}
        for term in self.terms:
            if term.string.num_qubits != self.num_qubits:
                raise DimensionError(
                    f"Term {term.string} has {term.string.num_qubits} qubits, "
                    f"sum has {self.num_qubits}"
                )
            merged[term.string] = merged.get(term.string, 0j) + term.coefficient
        canonical = tuple(
            PauliTerm(c, s) for s, c in merged.items() if abs(c) >= COEFFICIENT_CUTOFF
        )
        object.__setattr__(self, "terms", canonical)

    @classmethod
    def from_terms(
        cls, num_qubits: int, terms: Iterable[tuple[complex, PauliString | str]]
    ) -> PauliSum:
        built = []
        for coefficient, string in terms:
            if isinstance(string, str):
                string = PauliString.from_label(string)
            built.append(PauliTerm(coefficient, string))
        return cls(tuple(built), num_qubits)

    @classmethod
    def from_string(cls, string: PauliString, coefficient: complex = 1.0) -> PauliSum:
        return cls((PauliTerm(coefficient, string),), string.num_qubits)

    @classmethod
    def zero(cls, num_qubits: int) -> PauliSum:
        return cls((), num_qubits)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self.as_dict() == other.as_dict()

    __hash__ = None  # type: ignore[assignment]

    def as_dict(self) -> dict[PauliString, complex]:
        return {term.string: term.coefficient for term in self.terms}

    def coefficient(self, string: PauliString | str) -> complex:
        if isinstance(string, str):
            string = PauliString.from_label(string)
        return self.as_dict().get(string, 0j)

    @property
    def is_hermitian(self) -> bool:
        return all(abs(term.coefficient.imag) <= HERMITIAN_TOLERANCE for term in self.terms)

    @property
    def is_diagonal(self) -> bool:
        return all(term.string.is_diagonal for term in self.terms)

    def scaled(self, factor: complex) -> PauliSum:
        return PauliSum(tuple(PauliTerm(factor * t.coefficient, t.string) for t in self.terms),
                        self.num_qubits)

    def _check_compatible(self, other: PauliSum) -> None:
        if other.num_qubits != self.num_qubits:
            raise DimensionError(
                f"Cannot combine {self.num_qubits}-qubit and {other.num_qubits}-qubit sums"
            )

    def __add__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_compatible(other)
        return PauliSum(self.terms + other.terms, self.num_qubits)

    def __sub__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + other.scaled(-1.0)

    def __neg__(self) -> PauliSum:
        return self.scaled(-1.0)

    def __mul__(self, factor: Number) -> PauliSum:
        if not isinstance(factor, Number):
            return NotImplemented
        return self.scaled(complex(factor))

    __rmul__ = __mul__

    def __matmul__(self, other: PauliSum) -> PauliSum:
        """Operator product self * other."""
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check_compatible(other)
        products = []
        for left in self.terms:
            for right in other.terms:
                phase, string = pauli_multiply(left.string, right.string)
                products.append(PauliTerm(phase * left.coefficient * right.coefficient, string))
        return PauliSum(tuple(products), self.num_qubits)

    def __str__(self) -> str:
        return format_pauli_sum(self).rstrip("\n")


def apply_pauli_sum(h: PauliSum, state: StateVector | np.ndarray) -> np.ndarray:
    """Return H s without building a matrix.

    Accepts a StateVector or an amplitude array whose last axis has length 2^N,
    so a batch of states can be transformed in one call. The result is not
    normalized.
    """
    amps = _amplitudes(state, h.num_qubits)
    out = np.zeros(amps.shape, dtype=np.complex128)
    for term in h.terms:
        source, phases = pauli_action(term.string)
        out += term.coefficient * phases * amps[..., source]
    return out


def expectation(h: PauliSum, state: StateVector | np.ndarray) -> complex:
    """Return <s|H|s>; real up to rounding when H is Hermitian."""
    amps = _amplitudes(state, h.num_qubits)
    if amps.ndim != 1:
        raise DimensionError(f"expectation needs a single state, got shape {amps.shape}")
    return complex(np.vdot(amps, apply_pauli_sum(h, amps)))


def diagonal_values(h: PauliSum) -> np.ndarray:
    """Real diagonal of a diagonal (Z-only) Pauli sum over all basis states."""
    if not h.is_diagonal:
        raise ValueError("diagonal_values needs a PauliSum with only I/Z letters")
    indices = basis_indices(h.num_qubits)
    values = np.zeros(indices.size, dtype=np.float64)
    for term in h.terms:
        signs = 1 - 2 * (np.bitwise_count(indices & term.string.z) & 1)
        values += term.coefficient.real * signs
    return values


# Text format: one "<re> <im> <word>" line per term


def format_pauli_sum(h: PauliSum) -> str:
    lines = [
        f"{term.coefficient.real:.17g} {term.coefficient.imag:.17g} {term.string.label}"
        for term in h.terms
    ]
    return "".join(line + "\n" for line in lines)


def parse_pauli_sum(text: str, num_qubits: int | None = None) -> PauliSum:
    """Parse the text format written by format_pauli_sum.

    Blank lines and lines starting with "#" are ignored.

    Args:
        text: Serialized sum
        num_qubits: Expected word length; inferred from the first term if None

    Raises:
        ValueError: If a line is malformed or the sum is empty with no num_qubits
        DimensionError: If word lengths disagree
    """
    terms: list[PauliTerm] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"Line {line_number}: expected '<re> <im> <word>', got {raw!r}")
        try:
            coefficient = complex(float(parts[0]), float(parts[1]))
        except ValueError as e:
            raise ValueError(f"Line {line_number}: invalid coefficient in {raw!r}") from e
        string = PauliString.from_label(parts[2])
        if num_qubits is None:
            num_qubits = string.num_qubits
        elif string.num_qubits != num_qubits:
            raise DimensionError(
                f"Line {line_number}: word {parts[2]!r} has {string.num_qubits} letters, "
                f"expected {num_qubits}"
            )
        terms.append(PauliTerm(coefficient, string))
    if num_qubits is None:
        raise ValueError("Cannot infer qubit count from an empty Pauli sum")
    return PauliSum(tuple(terms), num_qubits)
