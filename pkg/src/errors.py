"""
Exception hierarchy for the pricing engine.

Command handlers map these to process exit codes:
ConfigurationError -> 2, NumericalDiagnosticError -> 3.
"""

from dataclasses import dataclass


class HestonMCError(Exception):
    """Base class for all engine errors."""


class ParameterError(HestonMCError, ValueError):
    """Invalid numerical parameter passed to a sampler or simulator."""


class ConfigurationError(HestonMCError):
    """Invalid model or experiment configuration."""


class UnsupportedConfigurationError(ConfigurationError):
    """Valid parameters that the algorithm cannot price."""


class NumericalDiagnosticError(HestonMCError):
    """A diagnostic or fitting step did not produce a usable result."""


class InternalInvariantError(HestonMCError, AssertionError):
    """An invariant that must hold by construction was violated."""


@dataclass(frozen=True)
class Diagnostic:
    """Single validation finding."""

    severity: str  # 'error' | 'warning'
    code: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == 'error'

    def to_dict(self) -> dict:
        return {'severity': self.severity, 'code': self.code, 'message': self.message}
