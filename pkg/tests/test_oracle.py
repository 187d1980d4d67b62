"""Tests for the dense exact oracle."""

import math
from functools import reduce

import numpy as np
import pytest

from adcovar.errors import CapacityError
from adcovar.hamiltonians import build_model
from adcovar.models import Spectrum
from adcovar.oracle import (
    MAX_DENSE_QUBITS,
    diagonalize,
    energy_variance,
    gap_and_epsilon,
    level_index,
    scan_spectra,
    to_dense,
)
from adcovar.pauli import PauliSum
from adcovar.schedule import MorphSchedule
from adcovar.state import StateVector

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_matrix(h: PauliSum) -> np.ndarray:
    size = 1 << h.num_qubits
    matrix = np.zeros((size, size), dtype=complex)
    for term in h.terms:
        letters = [SINGLE[letter] for letter in reversed(term.string.label)]
        matrix += term.coefficient * reduce(np.kron, letters)
    return matrix


def random_hamiltonian(rng: np.random.Generator, n: int, terms: int = 8) -> PauliSum:
    labels = ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(terms)]
    return PauliSum.from_terms(n, [(rng.normal(), label) for label in labels])


def x_to_z(delta_t: float = 0.1) -> MorphSchedule:
    return MorphSchedule(
        "mixing",
        PauliSum.from_terms(1, [(1.0, "X")]),
        PauliSum.from_terms(1, [(1.0, "Z")]),
        delta_t,
    )


class TestDense:
    """Dense matrices and spectra."""

    def test_matches_kron_products(self):
        rng = np.random.default_rng(0)
        for n in range(1, 6):
            h = random_hamiltonian(rng, n)
            np.testing.assert_allclose(to_dense(h), kron_matrix(h), atol=1e-12)

    def test_real_dtype_when_possible(self):
        assert to_dense(PauliSum.from_terms(2, [(1.0, "XX"), (1.0, "YY")])).dtype == np.float64
        assert to_dense(PauliSum.from_terms(1, [(1.0, "Y")])).dtype == np.complex128

    def test_spectra_match_numpy(self):
        rng = np.random.default_rng(1)
        for n in range(1, 6):
            h = random_hamiltonian(rng, n)
            np.testing.assert_allclose(
                diagonalize(h).eigenvalues, np.linalg.eigvalsh(kron_matrix(h)), atol=1e-10
            )

    def test_diagonal_fast_path(self):
        h = PauliSum.from_terms(2, [(0.5, "ZI"), (-0.2, "IZ")])
        spectrum = diagonalize(h, with_vectors=True)
        np.testing.assert_allclose(spectrum.eigenvalues, [-0.7, -0.3, 0.3, 0.7])
        np.testing.assert_array_equal(spectrum.eigenvectors[:, 0], [0, 1, 0, 0])

    def test_capacity(self):
        h = PauliSum.from_terms(MAX_DENSE_QUBITS + 1, [(1.0, "Z" * (MAX_DENSE_QUBITS + 1))])
        with pytest.raises(CapacityError):
            diagonalize(h)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError, match="Hermitian"):
            diagonalize(PauliSum.from_terms(1, [(1j, "X")]))


class TestLevels:
    """Level lookup and energy variance."""

    def test_level_index_nearest(self):
        spectrum = Spectrum(np.array([-1.0, 0.0, 2.0]))
        assert level_index(-0.9, spectrum) == 0
        assert level_index(1.5, spectrum) == 2

    def test_level_index_tie_goes_low(self):
        assert level_index(0.5, Spectrum(np.array([0.0, 1.0]))) == 0

    def test_variance_zero_on_eigenstate(self):
        h = PauliSum.from_terms(1, [(1.0, "Z")])
        assert energy_variance(h, StateVector.basis(1)) == 0.0

    def test_variance_of_plus_state(self):
        h = PauliSum.from_terms(1, [(1.0, "Z")])
        plus = StateVector(np.array([1, 1]) / math.sqrt(2), 1)
        assert energy_variance(h, plus) == pytest.approx(1.0)


class TestGap:
    """Minimum gap and transition amplitude along a schedule."""

    def test_single_qubit_mixing(self):
        """(1-s) X + s Z: gap 2|a(s)| is smallest at s=1/2, amplitude 1/|a(s)|."""
        report = gap_and_epsilon(x_to_z(), grid_points=201)
        assert report.s_at_min == pytest.approx(0.5)
        assert report.g_min == pytest.approx(math.sqrt(2))
        assert report.epsilon_transition == pytest.approx(math.sqrt(2))
        assert report.t_bound == pytest.approx(math.sqrt(2) / 2)
        assert report.level_gaps.shape == (201, 1)

    def test_degenerate_crossing(self):
        schedule = MorphSchedule(
            "mixing",
            PauliSum.from_terms(1, [(1.0, "Z")]),
            PauliSum.from_terms(1, [(-1.0, "Z")]),
        )
        report = gap_and_epsilon(schedule, grid_points=11)
        assert report.g_min == 0.0
        assert math.isinf(report.t_bound)

    def test_refined_grid_never_raises_g_min(self):
        """Each grid contains the previous one, so the scanned minimum can only drop."""
        _, schedule = build_model("spin_ring", {"num_qubits": 3}, seed=4)
        minima = [gap_and_epsilon(schedule, grid_points=points).g_min
                  for points in (6, 11, 21, 41, 81)]
        assert all(fine <= coarse + 1e-12 for coarse, fine in zip(minima, minima[1:]))

    def test_scan_spectra_shape(self):
        spectra = scan_spectra(x_to_z(), np.linspace(0, 1, 5))
        assert spectra.shape == (5, 2)
        np.testing.assert_allclose(spectra[0], [-1.0, 1.0])

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            gap_and_epsilon(x_to_z(), grid_points=1)
