"""Model Hamiltonian families and their morphing schedules.

- spin ring: random Z fields plus a Heisenberg ring, reached perturbatively
- Schwinger model: staggered-fermion lattice gauge model in spin form, reached
  by mixing from a transverse field
- max-cut: weighted Ising objective on a complete graph, mixed in from a
  transverse field

Qubit q is lattice site q + 1 in the one-indexed formulas below.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np

from adcovar.errors import ModelSpecError
from adcovar.pauli import PauliString, PauliSum
from adcovar.schedule import MorphSchedule

logger = logging.getLogger(__name__)


def _site(num_qubits: int, sites: Mapping[int, str]) -> PauliString:
    return PauliString.from_sites(num_qubits, sites)


def x_mixer(num_qubits: int) -> PauliSum:
    """Transverse field sum_i X_i."""
    return PauliSum.from_terms(num_qubits, [(1.0, _site(num_qubits, {q: "X"}))
                                            for q in range(num_qubits)])


@dataclass(frozen=True)
class SpinRingSpec:
    """Random-field Heisenberg ring.

    Attributes:
        num_qubits: Ring length, at least 3
        coupling: J
        fields: Explicit fields c_i in [-1, 1]; drawn uniformly when None
        field_scale: Multiplier applied to the fields
        seed: Seed for drawing fields
    """

    num_qubits: int = 10
    coupling: float = 1.0
    fields: tuple[float, ...] | None = None
    field_scale: float = 1.0
    seed: int | None = None

    def resolved_fields(self) -> np.ndarray:
        if self.fields is None:
            values = np.random.default_rng(self.seed).uniform(-1.0, 1.0, self.num_qubits)
        else:
            values = np.asarray(self.fields, dtype=np.float64)
            if values.shape != (self.num_qubits,):
                raise ModelSpecError(
                    f"Expected {self.num_qubits} fields, got {values.size}"
                )
            if np.any(np.abs(values) > 1.0):
                raise ModelSpecError("Spin-ring fields must lie in [-1, 1]")
        return self.field_scale * values


def build_spin_ring(spec: SpinRingSpec, delta_t: float = 0.05) -> tuple[PauliSum, MorphSchedule]:
    """H = sum_i c_i Z_i + J sum_i (X_i X_i+1 + Y_i Y_i+1 + Z_i Z_i+1), periodic.

    Raises:
        ModelSpecError: If num_qubits < 3 or the fields are invalid
    """
    n = spec.num_qubits
    if n < 3:
        raise ModelSpecError(f"Spin ring needs at least 3 qubits, got {n}")
    fields = spec.resolved_fields()
    h0 = PauliSum.from_terms(n, [(float(c), _site(n, {q: "Z"})) for q, c in enumerate(fields)])
    h1 = PauliSum.from_terms(
        n,
        [
            (spec.coupling, _site(n, {q: letter, (q + 1) % n: letter}))
            for q in range(n)
            for letter in "XYZ"
        ],
    )
    return h0 + h1, MorphSchedule("perturbative", h0, h1, delta_t)


@dataclass(frozen=True)
class SchwingerSpec:
    """Lattice Schwinger model.

    Attributes:
        num_qubits: Number of sites N (>= 2)
        coupling: J
        hopping: w
        mass: m
        theta_angle: Background-field angle theta
    """

    num_qubits: int = 5
    coupling: float = 1.0
    hopping: float = 0.1
    mass: float = 0.1
    theta_angle: float = 0.0


def build_schwinger(spec: SchwingerSpec, delta_t: float = 0.05) -> tuple[PauliSum, MorphSchedule]:
    """Schwinger Hamiltonian H_ZZ + H_pm + H_Z, mixed in from sum_i X_i.

    With one-indexed sites n:

        H_ZZ = J/2 sum_{n=2}^{N-1} sum_{1<=k<l<=n} Z_k Z_l
        H_pm = J/2 sum_{n=1}^{N-1} [w - (-1)^n (m/2) sin(theta)] (X_n X_n+1 + Y_n Y_n+1)
        H_Z  = (m cos(theta) / 2) sum_n (-1)^n Z_n - J/2 sum_{n=1}^{N-1} (n mod 2) sum_{l<=n} Z_l

    Raises:
        ModelSpecError: If num_qubits < 2
    """
    n = spec.num_qubits
    if n < 2:
        raise ModelSpecError(f"Schwinger model needs at least 2 sites, got {n}")
    half_j = spec.coupling / 2
    terms: list[tuple[float, PauliString]] = []
    for site in range(2, n):
        for left in range(1, site + 1):
            for right in range(left + 1, site + 1):
                terms.append((half_j, _site(n, {left - 1: "Z", right - 1: "Z"})))
    for site in range(1, n):
        sign = (-1) ** site
        amplitude = half_j * (spec.hopping - sign * spec.mass / 2 * math.sin(spec.theta_angle))
        for letter in "XY":
            terms.append((amplitude, _site(n, {site - 1: letter, site: letter})))
    staggered = spec.mass * math.cos(spec.theta_angle) / 2
    for site in range(1, n + 1):
        terms.append((staggered * (-1) ** site, _site(n, {site - 1: "Z"})))
    for site in range(1, n, 2):
        for below in range(1, site + 1):
            terms.append((-half_j, _site(n, {below - 1: "Z"})))
    h1 = PauliSum.from_terms(n, terms)
    return h1, MorphSchedule("mixing", x_mixer(n), h1, delta_t)


@dataclass(frozen=True)
class MaxCutSpec:
    """Weighted max-cut objective on the complete graph.

    Attributes:
        num_qubits: Number of nodes N (>= 2)
        node_weights: w_i in [0, 1]; drawn uniformly when None
        edge_weights: w_ij in [0, 1] in order (0,1), (0,2), ..., (N-2, N-1);
            drawn when None
        distinct_edge_weights: When drawing, use only this many distinct values,
            assigned to edges round-robin
        seed: Seed for drawing weights
    """

    num_qubits: int = 8
    node_weights: tuple[float, ...] | None = None
    edge_weights: tuple[float, ...] | None = None
    distinct_edge_weights: int | None = None
    seed: int | None = None

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.num_qubits) for j in range(i + 1, self.num_qubits)]

    def resolved_weights(self) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        num_edges = len(self.edges)
        if self.node_weights is None:
            nodes = rng.uniform(0.0, 1.0, self.num_qubits)
        else:
            nodes = np.asarray(self.node_weights, dtype=np.float64)
        if self.edge_weights is not None:
            edges = np.asarray(self.edge_weights, dtype=np.float64)
        elif self.distinct_edge_weights is not None:
            if self.distinct_edge_weights < 1:
                raise ModelSpecError("distinct_edge_weights must be >= 1")
            values = rng.uniform(0.0, 1.0, self.distinct_edge_weights)
            edges = values[np.arange(num_edges) % values.size]
        else:
            edges = rng.uniform(0.0, 1.0, num_edges)
        if nodes.shape != (self.num_qubits,) or edges.shape != (num_edges,):
            raise ModelSpecError(
                f"Expected {self.num_qubits} node and {num_edges} edge weights, "
                f"got {nodes.size} and {edges.size}"
            )
        for name, weights in (("node", nodes), ("edge", edges)):
            if np.any((weights < 0.0) | (weights > 1.0)):
                raise ModelSpecError(f"Max-cut {name} weights must lie in [0, 1]")
        return nodes, edges


def build_maxcut(spec: MaxCutSpec, delta_t: float = 0.05) -> tuple[PauliSum, MorphSchedule]:
    """H = sum_i w_i Z_i + sum_{i<j} w_ij Z_i Z_j, mixed in from sum_i X_i.

    Raises:
        ModelSpecError: If num_qubits < 2 or weights are invalid
    """
    n = spec.num_qubits
    if n < 2:
        raise ModelSpecError(f"Max-cut needs at least 2 nodes, got {n}")
    nodes, edges = spec.resolved_weights()
    terms = [(float(w), _site(n, {q: "Z"})) for q, w in enumerate(nodes)]
    terms.extend(
        (float(w), _site(n, {i: "Z", j: "Z"}))
        for (i, j), w in zip(spec.edges, edges, strict=True)
    )
    h1 = PauliSum.from_terms(n, terms)
    return h1, MorphSchedule("mixing", x_mixer(n), h1, delta_t)


# Presets

PRESETS: dict[str, Any] = {
    "spin_ring": (SpinRingSpec(num_qubits=10, coupling=1.0), build_spin_ring),
    "schwinger": (
        SchwingerSpec(num_qubits=5, coupling=1.0, hopping=0.1, mass=0.1, theta_angle=0.0),
        build_schwinger,
    ),
    "maxcut": (MaxCutSpec(num_qubits=8, distinct_edge_weights=14), build_maxcut),
}

_TUPLE_FIELDS = {"fields", "node_weights", "edge_weights"}


def build_model(
    preset: str,
    overrides: Mapping[str, Any] | None = None,
    *,
    seed: int | None = None,
    delta_t: float = 0.05,
) -> tuple[PauliSum, MorphSchedule]:
    """Build a preset model with optional field overrides.

    Args:
        preset: "spin_ring", "schwinger" or "maxcut"
        overrides: Replacement values for fields of the preset's spec
        seed: Instance seed for randomized presets (ignored by "schwinger"),
            used unless overrides set one
        delta_t: Step of the returned schedule

    Raises:
        ModelSpecError: On unknown presets or override names, or invalid values
    """
    if preset not in PRESETS:
        raise ModelSpecError(
            f"Unknown model preset {preset!r}; choose from {', '.join(sorted(PRESETS))}"
        )
    spec, builder = PRESETS[preset]
    values = dict(overrides or {})
    known = {f.name for f in dataclasses.fields(spec)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ModelSpecError(f"Unknown {preset} parameters: {', '.join(unknown)}")
    for name in _TUPLE_FIELDS & set(values):
        if values[name] is not None:
            values[name] = tuple(values[name])
    if "seed" in known and "seed" not in values:
        values["seed"] = seed
    spec = dataclasses.replace(spec, **values)
    logger.debug("building %s model: %s", preset, spec)
    return builder(spec, delta_t)
