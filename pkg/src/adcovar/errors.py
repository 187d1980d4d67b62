"""Exception hierarchy for adcovar.

All library errors derive from AdcovarError so callers (the CLI, the experiment
harness) can catch the family in one place and still tell the kinds apart.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    import numpy as np

    from adcovar.models import Trajectory


class AdcovarError(Exception):
    """Base class for all adcovar errors."""

    code = "ADCOVAR_ERROR"


class DimensionError(AdcovarError, ValueError):
    """Operands of incompatible size.

    Raised for:
    - Pauli words of different length
    - statevectors whose length is not 2^N for the operator's N
    - parameter vectors whose length differs from the circuit's parameter count
    """

    code = "DIMENSION_MISMATCH"


class NormalizationError(AdcovarError, ValueError):
    """A statevector is not normalized within tolerance."""

    code = "NOT_NORMALIZED"


class ParameterIndexError(AdcovarError, IndexError):
    """A parameter index outside 0..nu-1 was requested."""

    code = "PARAMETER_INDEX"


class EnumerationError(AdcovarError, ValueError):
    """More operators were requested than the enumerable pool contains."""

    code = "POOL_TOO_LARGE"


class IllConditionedError(AdcovarError, ArithmeticError):
    """The Levenberg-Marquardt normal matrix is singular at zero damping."""

    code = "ILL_CONDITIONED"


class DivergenceError(AdcovarError, ArithmeticError):
    """An iterative solver produced non-finite parameters or energies.

    Attributes:
        last_theta: The last finite parameter vector
        t: Morphing time of the failing step (set by the adiabatic driver)
        trajectory: Partial trajectory up to the failing step (adiabatic driver)
    """

    code = "DIVERGED"

    def __init__(
        self,
        message: str,
        *,
        last_theta: np.ndarray | None = None,
        t: float | None = None,
        trajectory: Trajectory | None = None,
    ):
        super().__init__(message)
        self.last_theta = last_theta
        self.t = t
        self.trajectory = trajectory


class NotAnalyticallySolvableError(AdcovarError, ValueError):
    """The initial Hamiltonian has no closed-form eigenstates we can prepare."""

    code = "NOT_SOLVABLE"


class ScheduleRangeError(AdcovarError, ValueError):
    """A morphing time outside [0, 1] or a step outside (0, 1]."""

    code = "SCHEDULE_RANGE"


class ModelSpecError(AdcovarError, ValueError):
    """A Hamiltonian family was given invalid size or weights."""

    code = "INVALID_MODEL"


class CapacityError(AdcovarError, ValueError):
    """The dense exact oracle was asked for more qubits than it supports."""

    code = "CAPACITY_EXCEEDED"


class FitError(AdcovarError, ValueError):
    """Scaling fit input is too small or contains nonpositive values."""

    code = "INVALID_FIT_INPUT"


class ArgumentError(AdcovarError, ValueError):
    """A command-line option could not be parsed."""

    code = "INVALID_ARGUMENT"


class ConfigError(AdcovarError, ValueError):
    """Experiment configuration failed validation.

    Attributes:
        field: Dotted path of the offending field ("" when the file itself is bad)
        details: Extra machine-readable context
    """

    code = "INVALID_CONFIG"

    def __init__(self, message: str, *, field: str = "", details: dict[str, Any] | None = None):
        super().__init__(message)
        self.field = field
        self.details = details or {}
