"""Numerical laboratory for neutral McKean-Vlasov SDEs with small noise."""
from .errors import ConfigurationError, DomainError, NeutralLDPError, NumericError, UnsupportedError

__version__ = "0.1.0"

__all__ = ['NeutralLDPError', 'DomainError', 'ConfigurationError', 'UnsupportedError', 'NumericError']
