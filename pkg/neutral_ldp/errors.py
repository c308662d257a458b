class NeutralLDPError(Exception):
    """Base class for every error raised by the laboratory."""


class DomainError(NeutralLDPError, ValueError):
    """An argument lies outside the domain of an operation (off-grid time, violated hypothesis)."""


class ConfigurationError(NeutralLDPError, ValueError):
    """Inconsistent geometry, unknown model name or malformed experiment config."""


class UnsupportedError(NeutralLDPError):
    """The request is well-formed but outside what the laboratory implements."""


class NumericError(NeutralLDPError, ArithmeticError):
    """A numerical procedure failed; carries the last residual when there is one."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual
