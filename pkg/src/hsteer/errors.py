"""Exception types raised by the library.

Every failure mode that callers are expected to handle gets its own class;
generic misuse (bad argument types, malformed files) raises the builtin
ValueError. All classes derive from SteeringError so `except SteeringError`
catches any library-level failure.
"""


class SteeringError(Exception):
    """Base class for all library errors."""


class ZeroState(SteeringError):
    """Normalization of a (numerically) zero state was requested."""


class WindowTooSmall(SteeringError):
    """An embedding would cut nonzero coefficients."""


class EmptySupport(SteeringError):
    """A state with no support above tolerance was given to the planner."""


class EdgeSpill(SteeringError):
    """A shift would move non-negligible amplitude out of the window."""


class WindowMismatch(SteeringError):
    """Operands live on different windows where a common one is required."""


class WindowMissesBlock(SteeringError):
    """A two-level operation needs indices 0 and 1 inside the window."""


class NotUnitary(SteeringError):
    """A matrix expected to be unitary is not, beyond tolerance."""


class NotHermitian(SteeringError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class BadBand(SteeringError):
    """Invalid bandwidth parameter (p < 1)."""


class BadDim(SteeringError):
    """Invalid truncation dimension for oscillator-basis operators."""


class BadParams(SteeringError):
    """Invalid parameters for a Monte-Carlo or diagnostic run."""


class QuadratureUnconverged(SteeringError):
    """Node doubling changed a quadrature result by more than the gate."""


class BudgetInfeasible(SteeringError):
    """No (p, dt) within the configured limits satisfies the error budget."""
