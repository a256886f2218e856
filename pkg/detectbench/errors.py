"""
Exception hierarchy for detectbench.
"""

from typing import Optional


class DetectBenchError(Exception):
    """Base class for all detectbench errors."""


class AssemblyError(DetectBenchError):
    """Raised when assembly source cannot be turned into a Program."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(DetectBenchError):
    """Invalid experiment or scheme configuration."""


class FaultSpecError(DetectBenchError):
    """A fault targets state that does not exist."""


class StateMismatchError(DetectBenchError):
    """Two architectural states cannot be compared."""


class CampaignError(DetectBenchError):
    """Empty or out-of-domain input to campaign planning or statistics."""


class GoldenRunError(DetectBenchError):
    """A fault-free reference run did not halt or produced the wrong output."""


class InvariantViolation(DetectBenchError):
    """A campaign observed a result that the scheme must never produce."""
