"""Exact reference spectra by dense diagonalization.

Only for small systems: the dense matrix of an N-qubit sum has 4^N entries, so
the oracle refuses N > MAX_DENSE_QUBITS. Diagonal (Z-only) sums skip the matrix
and sort the diagonal directly.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import eigh

from adcovar.errors import CapacityError
from adcovar.models import GapReport, Spectrum
from adcovar.pauli import (
    PauliSum,
    apply_pauli_sum,
    basis_indices,
    diagonal_values,
    pauli_action,
)
from adcovar.schedule import MorphSchedule, morph_hamiltonian
from adcovar.state import StateVector

logger = logging.getLogger(__name__)

MAX_DENSE_QUBITS = 14
DEGENERATE_GAP = 1e-12


def check_capacity(num_qubits: int) -> None:
    if num_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(
            f"Exact oracle supports at most {MAX_DENSE_QUBITS} qubits, got {num_qubits}"
        )


def _is_real(h: PauliSum) -> bool:
    # Entries are real when each coefficient times its i^(#Y) phase is real
    for term in h.terms:
        odd_y = (term.string.x & term.string.z).bit_count() % 2 == 1
        part = term.coefficient.real if odd_y else term.coefficient.imag
        if part != 0.0:
            return False
    return True


def to_dense(h: PauliSum) -> np.ndarray:
    """Dense 2^N x 2^N matrix of h, real-valued when possible.

    Raises:
        CapacityError: If N > MAX_DENSE_QUBITS
    """
    check_capacity(h.num_qubits)
    real = _is_real(h)
    size = 1 << h.num_qubits
    matrix = np.zeros((size, size), dtype=np.float64 if real else np.complex128)
    rows = basis_indices(h.num_qubits)
    for term in h.terms:
        source, phases = pauli_action(term.string)
        values = term.coefficient * phases
        matrix[rows, source] += values.real if real else values
    return matrix


def diagonalize(h: PauliSum, with_vectors: bool = False) -> Spectrum:
    """Ascending eigenvalues of a Hermitian sum.

    Raises:
        CapacityError: If N > MAX_DENSE_QUBITS
        ValueError: If h is not Hermitian
    """
    check_capacity(h.num_qubits)
    if not h.is_hermitian:
        raise ValueError("diagonalize needs a Hermitian PauliSum (real coefficients)")
    if h.is_diagonal:
        values = diagonal_values(h)
        order = np.argsort(values, kind="stable")
        vectors = np.eye(values.size)[:, order] if with_vectors else None
        return Spectrum(values[order], vectors)
    dense = to_dense(h)
    if with_vectors:
        eigenvalues, eigenvectors = eigh(dense)
        return Spectrum(eigenvalues, eigenvectors)
    return Spectrum(eigh(dense, eigvals_only=True))


def level_index(energy: float, spectrum: Spectrum) -> int:
    """Index of the eigenvalue nearest to energy; ties go to the lower index."""
    if len(spectrum) == 0:
        raise ValueError("Spectrum is empty")
    return int(np.argmin(np.abs(spectrum.eigenvalues - energy)))


def energy_variance(h: PauliSum, state: StateVector) -> float:
    """<H^2> - <H>^2 via ||H psi||^2, clipped at zero against rounding."""
    h_amps = apply_pauli_sum(h, state)
    mean = float(np.vdot(state.amplitudes, h_amps).real)
    second = float(np.vdot(h_amps, h_amps).real)
    return max(0.0, second - mean**2)


def scan_spectra(schedule: MorphSchedule, grid: np.ndarray) -> np.ndarray:
    """Eigenvalues of H(s) for every s in grid, shape (len(grid), 2^N)."""
    check_capacity(schedule.num_qubits)
    return np.stack([diagonalize(morph_hamiltonian(schedule, float(s))).eigenvalues
                     for s in grid])


def gap_and_epsilon(schedule: MorphSchedule, grid_points: int = 201) -> GapReport:
    """Minimum gap and transition amplitude along the schedule.

    Scans a uniform grid over [0, 1]. At each point the gap is E_1 - E_0 and
    the amplitude is |<1(s)|dH/ds|0(s)>|. A minimum gap below 1e-12 counts as
    degenerate: g_min is reported as 0.0 and the time bound as infinite.

    Raises:
        CapacityError: If N > MAX_DENSE_QUBITS
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    check_capacity(schedule.num_qubits)
    grid = np.linspace(0.0, 1.0, grid_points)
    derivative = schedule.derivative()
    gaps = np.empty(grid_points)
    level_gaps = np.empty((grid_points, (1 << schedule.num_qubits) - 1))
    amplitudes = np.empty(grid_points)
    for i, s in enumerate(grid):
        spectrum = diagonalize(morph_hamiltonian(schedule, float(s)), with_vectors=True)
        ground = spectrum.eigenvectors[:, 0]
        excited = spectrum.eigenvectors[:, 1]
        level_gaps[i] = np.diff(spectrum.eigenvalues)
        gaps[i] = level_gaps[i, 0]
        amplitudes[i] = abs(np.vdot(excited, apply_pauli_sum(derivative, ground)))
    at_min = int(np.argmin(gaps))
    g_min = float(gaps[at_min])
    epsilon = float(amplitudes.max())
    if g_min < DEGENERATE_GAP:
        logger.info("schedule is degenerate at s=%.4f; time bound is infinite", grid[at_min])
        g_min = 0.0
        t_bound = float("inf")
    else:
        t_bound = epsilon / g_min**2
    return GapReport(
        g_min=g_min,
        s_at_min=float(grid[at_min]),
        epsilon_transition=epsilon,
        t_bound=t_bound,
        grid=grid,
        gaps=gaps,
        level_gaps=level_gaps,
    )
