"""Exception types shared across the package."""


class SquidCavityError(Exception):
    """Base class for all package-specific errors."""


class IndexOutOfRange(SquidCavityError, IndexError):
    """Basis index outside the truncated Hilbert space."""


class DimensionMismatch(SquidCavityError, ValueError):
    """Operands live on Hilbert spaces of different truncation."""


class HermiticityViolation(SquidCavityError, ValueError):
    """Matrix passed as Hermitian fails the Hermiticity check."""


class TruncationTooSmall(SquidCavityError, ValueError):
    """Fock-space truncation leaves no guard band above the target."""


class InvalidTarget(SquidCavityError, ValueError):
    """Requested target state is malformed (negative photon number,
    non-normalized coefficients, ...)."""


class PhaseUnreachable(SquidCavityError, ValueError):
    """Target needs a relative phase the fixed-axis pulses cannot produce.

    ``level`` is the cavity level at which the back-solver got stuck.
    """

    def __init__(self, level, message=None):
        self.level = level
        if message is None:
            message = (
                f"target phase at level {level} is outside the reachable set; "
                "retry with idle steps enabled"
            )
        super().__init__(message)


class StepTooLarge(SquidCavityError, ValueError):
    """Integrator step exceeds the stability bound."""


class NotAPhysicalKnob(SquidCavityError, ValueError):
    """Requested knob settings for a pulse kind that has none (Idle)."""
