"""Morphing schedules between an initial and a target Hamiltonian.

Two families are supported:

    mixing:        H(t) = (1 - t) H0 + t H1
    perturbative:  H(t) = H0 + t H1

with t in [0, 1] stepped on a uniform grid of spacing delta_t whose last point
is exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from adcovar.errors import DimensionError, ScheduleRangeError
from adcovar.pauli import PauliSum, PauliTerm

ScheduleKind = Literal["mixing", "perturbative"]


def _check_delta_t(delta_t: float) -> None:
    if not (math.isfinite(delta_t) and 0.0 < delta_t <= 1.0):
        raise ScheduleRangeError(f"delta_t must lie in (0, 1], got {delta_t!r}")


@dataclass(frozen=True, eq=False)
class MorphSchedule:
    """Path H(t) from h0 (at t=0) to the target (at t=1)."""

    kind: ScheduleKind
    h0: PauliSum
    h1: PauliSum
    delta_t: float = 0.05

    def __post_init__(self) -> None:
        if self.kind not in ("mixing", "perturbative"):
            raise ValueError(f"Unknown schedule kind {self.kind!r}")
        if self.h0.num_qubits != self.h1.num_qubits:
            raise DimensionError(
                f"h0 acts on {self.h0.num_qubits} qubits, h1 on {self.h1.num_qubits}"
            )
        _check_delta_t(self.delta_t)

    @property
    def num_qubits(self) -> int:
        return self.h0.num_qubits

    def at(self, t: float) -> PauliSum:
        return morph_hamiltonian(self, t)

    def derivative(self) -> PauliSum:
        """dH/dt, constant along the path."""
        if self.kind == "mixing":
            return self.h1 - self.h0
        return self.h1

    def target(self) -> PauliSum:
        return self.at(1.0)

    def with_delta_t(self, delta_t: float) -> MorphSchedule:
        return replace(self, delta_t=delta_t)

    def with_kind(self, kind: ScheduleKind) -> MorphSchedule:
        return replace(self, kind=kind)


def morph_hamiltonian(schedule: MorphSchedule, t: float) -> PauliSum:
    """H(t) as a canonical PauliSum.

    Raises:
        ScheduleRangeError: If t is outside [0, 1]
    """
    if not 0.0 <= t <= 1.0:
        raise ScheduleRangeError(f"Morphing time must lie in [0, 1], got {t!r}")
    h0_weight = 1.0 - t if schedule.kind == "mixing" else 1.0
    terms = [PauliTerm(h0_weight * term.coefficient, term.string) for term in schedule.h0]
    terms.extend(PauliTerm(t * term.coefficient, term.string) for term in schedule.h1)
    return PauliSum(tuple(terms), schedule.num_qubits)


def time_grid(delta_t: float) -> np.ndarray:
    """Grid 0, dt, 2 dt, ... ending exactly at 1.

    The number of steps is ceil(1/dt) (with a 1e-9 guard against rounding), so
    the final step may be shorter than dt.
    """
    _check_delta_t(delta_t)
    steps = math.ceil(1.0 / delta_t - 1e-9)
    points = [min(k * delta_t, 1.0) for k in range(steps)]
    points.append(1.0)
    return np.array(points, dtype=np.float64)
