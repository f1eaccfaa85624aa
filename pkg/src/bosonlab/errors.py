"""Exception hierarchy shared by all bosonlab modules."""


class BosonLabError(Exception):
    """Base class for all errors raised by bosonlab."""


class ExpressionError(BosonLabError):
    """Problem while parsing an expression string.

    Carries the character offset of the offending token when known.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ValidationError(BosonLabError):
    """A precondition on operation inputs was violated."""


class ModeMismatchError(ValidationError):
    """Operands refer to different numbers of modes."""


class NotHermitianError(ValidationError):
    """A Hermitian matrix was required."""


class NotRealValuedError(ValidationError):
    """A real-valued (conjugate-symmetric) classical polynomial was required."""


class DefiniteEnergyError(ValidationError):
    """An ensemble member does not lie on the requested energy level set."""

    def __init__(self, member_index, energy, target):
        super().__init__(
            f"ensemble member {member_index} has energy {energy!r}, "
            f"expected {target!r} within 1e-9"
        )
        self.member_index = member_index
        self.energy = energy
        self.target = target


class DimensionLimitError(BosonLabError):
    """Requested Fock-space dimension exceeds the configured limit."""


class TruncationError(BosonLabError):
    """Fock cutoffs are too small for the requested amplitudes."""


class BlowUpError(BosonLabError):
    """A trajectory left the configured coordinate bounds during integration."""


class ConfigError(BosonLabError):
    """A config file or CLI argument could not be interpreted."""
