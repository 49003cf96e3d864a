"""Exception types raised across the package."""


class SenbeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SenbeError, ValueError):
    """An argument lies outside the domain of a function."""


class ParameterRangeError(DomainError):
    """A proof parameter violates its admissible range."""


class ConfigurationError(SenbeError, ValueError):
    """Inconsistent or unsupported configuration."""


class MomentDivergenceError(SenbeError, ArithmeticError):
    """A required moment of the law is infinite."""

    def __init__(self, order, law=None):
        self.order = order
        where = f" of {law}" if law is not None else ""
        super().__init__(f"moment of order {order}{where} diverges")


class DegenerateMomentsError(SenbeError, ValueError):
    """Zero variance or zero third absolute moment."""


class LyapunovError(SenbeError, ValueError):
    """rho3 < 1 for a unit-variance law, which is impossible."""


class InfeasibleTruncationError(SenbeError, ValueError):
    """No zero-mean truncation window exists for the requested cut."""


class UnsupportedSpecError(SenbeError, ValueError):
    """The distribution spec cannot be used for the requested operation."""


class ContractError(SenbeError, ValueError):
    """A caller-supplied argument breaks an operation's precondition."""
