"""Tests for morphing schedules and the adiabatic driver."""

import math

import numpy as np
import pytest

from adcovar.adiabatic import (
    StepOutcome,
    adiabatic_covar_run,
    init_eigenstate_params,
    run_adiabatic_loop,
)
from adcovar.covar import LMConfig
from adcovar.errors import (
    DimensionError,
    DivergenceError,
    NotAnalyticallySolvableError,
    ScheduleRangeError,
)
from adcovar.hamiltonians import x_mixer
from adcovar.pauli import PauliSum, apply_pauli_sum, expectation
from adcovar.schedule import MorphSchedule, morph_hamiltonian, time_grid
from adcovar.statevector import hardware_efficient, run_circuit


def x_to_z(delta_t: float = 0.25) -> MorphSchedule:
    """One qubit mixed from X into Z; the ground state moves from |-> to |1>."""
    return MorphSchedule(
        "mixing",
        PauliSum.from_terms(1, [(1.0, "X")]),
        PauliSum.from_terms(1, [(1.0, "Z")]),
        delta_t,
    )


def diagonal_schedule() -> MorphSchedule:
    h0 = PauliSum.from_terms(2, [(0.5, "ZI"), (-0.2, "IZ")])
    h1 = PauliSum.from_terms(2, [(1.0, "XX")])
    return MorphSchedule("perturbative", h0, h1, 0.5)


# =============================================================================
# Schedules
# =============================================================================


class TestTimeGrid:
    """Uniform grids ending exactly at 1."""

    def test_quarter_step(self):
        np.testing.assert_array_equal(time_grid(0.25), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_uneven_last_step(self):
        grid = time_grid(0.3)
        assert len(grid) == 5
        assert grid[-1] == 1.0
        assert grid[-2] == pytest.approx(0.9)

    def test_rounding_guard(self):
        """0.05 gives 21 points, not 22."""
        assert len(time_grid(0.05)) == 21
        assert len(time_grid(0.1)) == 11

    def test_full_step(self):
        np.testing.assert_array_equal(time_grid(1.0), [0.0, 1.0])

    @pytest.mark.parametrize("delta_t", [0.0, -0.1, 1.5, math.nan])
    def test_invalid_step(self, delta_t):
        with pytest.raises(ScheduleRangeError):
            time_grid(delta_t)


class TestMorphHamiltonian:
    """Mixing and perturbative interpolation."""

    def test_mixing_endpoints(self):
        schedule = x_to_z()
        assert morph_hamiltonian(schedule, 0.0) == schedule.h0
        assert morph_hamiltonian(schedule, 1.0) == schedule.h1

    def test_mixing_midpoint(self):
        mid = morph_hamiltonian(x_to_z(), 0.5)
        assert mid.coefficient("X") == 0.5
        assert mid.coefficient("Z") == 0.5

    def test_perturbative_keeps_h0(self):
        schedule = diagonal_schedule()
        h = morph_hamiltonian(schedule, 0.3)
        assert h.coefficient("ZI") == 0.5
        assert h.coefficient("XX") == 0.3
        assert schedule.target() == schedule.h0 + schedule.h1

    def test_derivative(self):
        assert x_to_z().derivative() == PauliSum.from_terms(1, [(1.0, "Z"), (-1.0, "X")])
        assert diagonal_schedule().derivative() == diagonal_schedule().h1

    def test_out_of_range(self):
        with pytest.raises(ScheduleRangeError):
            morph_hamiltonian(x_to_z(), 1.01)

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            MorphSchedule("mixing", x_mixer(1), x_mixer(2))


# =============================================================================
# Initialization
# =============================================================================


class TestInitEigenstateParams:
    """Exact preparation of eigenstates of the initial Hamiltonian."""

    def test_diagonal_ground_state(self):
        """0.5 Z0 - 0.2 Z1 is lowest on qubit 0 = 1, qubit 1 = 0."""
        circuit = hardware_efficient(2, 2)
        theta, bits = init_eigenstate_params(diagonal_schedule(), 0, circuit)
        assert bits == (1, 0)
        np.testing.assert_array_equal(theta, np.zeros(circuit.parameter_count))

    def test_diagonal_excited_levels(self):
        circuit = hardware_efficient(2, 1)
        levels = [init_eigenstate_params(diagonal_schedule(), k, circuit)[1] for k in range(4)]
        assert levels == [(1, 0), (1, 1), (0, 0), (0, 1)]

    def test_x_mixer_ground_state(self):
        """Two ring layers prepare |-->; the CZ blocks cancel."""
        schedule = MorphSchedule("mixing", x_mixer(2), PauliSum.from_terms(2, [(1.0, "ZZ")]))
        circuit = hardware_efficient(2, 2)
        theta, bits = init_eigenstate_params(schedule, 0, circuit)
        amps = run_circuit(circuit, theta, bits)
        np.testing.assert_allclose(amps, [0.5, -0.5, -0.5, 0.5], atol=1e-12)

    def test_x_mixer_single_qubit_uses_last_layer(self):
        circuit = hardware_efficient(1, 2)
        theta, bits = init_eigenstate_params(x_to_z(), 1, circuit)
        amps = run_circuit(circuit, theta, bits)
        np.testing.assert_allclose(amps, np.array([1, 1]) / math.sqrt(2), atol=1e-12)

    def test_prepared_state_is_eigenstate(self):
        schedule = MorphSchedule("mixing", x_mixer(3), PauliSum.from_terms(3, [(1.0, "ZZI")]))
        circuit = hardware_efficient(3, 3)
        for level in range(8):
            theta, bits = init_eigenstate_params(schedule, level, circuit, use_oracle=True)
            amps = run_circuit(circuit, theta, bits)
            energy = expectation(x_mixer(3), amps).real
            # X-mixer levels: -3, then three at -1, three at +1, then +3
            assert energy == pytest.approx(-3.0 + 2 * ((level + 2) // 3))
            np.testing.assert_allclose(
                apply_pauli_sum(x_mixer(3), amps), energy * amps, atol=1e-10
            )

    def test_single_layer_with_entanglers_rejected(self):
        schedule = MorphSchedule("mixing", x_mixer(2), PauliSum.from_terms(2, [(1.0, "ZZ")]))
        with pytest.raises(NotAnalyticallySolvableError):
            init_eigenstate_params(schedule, 0, hardware_efficient(2, 1))

    def test_unsupported_initial_hamiltonian(self):
        schedule = MorphSchedule(
            "mixing", PauliSum.from_terms(2, [(1.0, "XX")]), PauliSum.from_terms(2, [(1.0, "ZZ")])
        )
        with pytest.raises(NotAnalyticallySolvableError):
            init_eigenstate_params(schedule, 0, hardware_efficient(2, 2))

    def test_level_out_of_range(self):
        with pytest.raises(ValueError):
            init_eigenstate_params(diagonal_schedule(), 4, hardware_efficient(2, 1))


# =============================================================================
# Driver
# =============================================================================


class TestAdiabaticLoop:
    """The shared outer loop."""

    def test_handoff_is_exact(self):
        """Each step starts from exactly the previous step's final theta."""
        circuit = hardware_efficient(1, 1)
        received, returned = [], []

        def inner(h, theta, bits, step, is_final):
            received.append(theta.copy())
            out = theta + 0.1 * step
            returned.append(out.copy())
            return StepOutcome(out, 3)

        trajectory = run_adiabatic_loop(x_to_z(), circuit, 0, inner, method="covar")
        assert len(trajectory) == 5
        for before, after in zip(returned[:-1], received[1:], strict=True):
            np.testing.assert_array_equal(before, after)
        for record, theta in zip(trajectory.records[1:], returned, strict=True):
            np.testing.assert_array_equal(record.theta, theta)

    def test_first_record_is_exact_initialization(self):
        circuit = hardware_efficient(1, 1)
        trajectory = run_adiabatic_loop(
            x_to_z(), circuit, 0, lambda *args: StepOutcome(args[1], 1), method="covar"
        )
        first = trajectory.records[0]
        assert first.t == 0.0
        assert first.covar_iters == 0
        assert first.energy == pytest.approx(-1.0)
        assert first.f_norm == pytest.approx(0.0, abs=1e-12)

    def test_final_flag_only_on_last_step(self):
        flags = []

        def inner(h, theta, bits, step, is_final):
            flags.append(is_final)
            return StepOutcome(theta, 0)

        run_adiabatic_loop(x_to_z(), hardware_efficient(1, 1), 0, inner, method="covar")
        assert flags == [False, False, False, True]

    def test_divergence_carries_partial_trajectory(self):
        def inner(h, theta, bits, step, is_final):
            if step == 2:
                raise DivergenceError("boom", last_theta=theta)
            return StepOutcome(theta, 1)

        with pytest.raises(DivergenceError) as exc_info:
            run_adiabatic_loop(x_to_z(), hardware_efficient(1, 1), 0, inner, method="covar")
        error = exc_info.value
        assert error.t == 0.5
        assert len(error.trajectory) == 2
        assert error.trajectory.failed_at == 0.5


class TestAdiabaticCovar:
    """Adiabatic CoVaR end to end on small systems."""

    def test_single_qubit_reaches_ground_state(self):
        config = LMConfig(locality=1, covariance_norm_tol=1e-6, max_iterations=50)
        trajectory = adiabatic_covar_run(
            x_to_z(0.25), hardware_efficient(1, 2), 0, config, use_oracle=True,
            rng=np.random.default_rng(0),
        )
        final = trajectory.final
        assert final.t == 1.0
        assert final.energy == pytest.approx(-1.0, abs=1e-4)
        assert final.level_index == 0
        assert abs(final.delta_e) < 1e-4

    def test_seeded_runs_are_identical(self):
        config = LMConfig(max_iterations=5, pool_size=6, shots=10_000)
        h0 = PauliSum.from_terms(2, [(0.5, "ZI"), (-0.2, "IZ")])
        h1 = PauliSum.from_terms(2, [(1.0, "XX"), (1.0, "YY"), (1.0, "ZZ")])
        schedule = MorphSchedule("perturbative", h0, h1, 0.5)
        a = adiabatic_covar_run(schedule, hardware_efficient(2, 2), 0, config,
                                rng=np.random.default_rng(7))
        b = adiabatic_covar_run(schedule, hardware_efficient(2, 2), 0, config,
                                rng=np.random.default_rng(7))
        assert a.rows() == b.rows()

    def test_rows_rederive_energy(self):
        """Every stored energy follows from the stored theta and input bits."""
        schedule = diagonal_schedule()
        circuit = hardware_efficient(2, 2)
        trajectory = adiabatic_covar_run(
            schedule, circuit, 1, LMConfig(max_iterations=10), rng=np.random.default_rng(1)
        )
        for row in trajectory.rows():
            theta = np.array([float(v) for v in row["theta"].split()])
            bits = tuple(int(b) for b in row["initial_bits"])
            h = morph_hamiltonian(schedule, float(row["t"]))
            energy = expectation(h, run_circuit(circuit, theta, bits)).real
            assert energy == pytest.approx(float(row["energy"]), abs=1e-9)
            assert row["method"] == "covar"
