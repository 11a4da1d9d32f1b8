"""Exception hierarchy shared by every mpcore module."""


class MpcoreError(Exception):
    """Base class for all errors raised by this package."""


class ArithmeticOverflowError(MpcoreError):
    """A component or exponent left the representable range (inf/nan head,
    or a BigFloat exponent beyond +-2**62)."""


class DivideByZeroError(MpcoreError):
    """Division by an exact zero value."""


class DomainError(MpcoreError):
    """Operand outside the mathematical domain, e.g. sqrt of a negative."""


class SingularMatrixError(MpcoreError):
    """No usable pivot at some elimination step.

    The failing step index is kept so callers can report where
    elimination broke down.
    """

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class DimensionError(MpcoreError):
    """Operand shapes do not conform."""


class ParseError(MpcoreError):
    """Malformed numeric literal or matrix file."""


class GenerationError(MpcoreError):
    """Test-system generation failed after all retries."""
