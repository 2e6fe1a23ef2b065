"""
Exception hierarchy for the lab.
Every error knows which exit code the CLI should return for it.
"""


class FavardLabError(Exception):
    """Base class for all lab errors."""
    exit_code = 1


class InvariantViolation(FavardLabError):
    """A checked property failed (mass, monotonicity, a lemma audit)."""
    exit_code = 2

    def __init__(self, message: str, counterexamples: list | None = None):
        super().__init__(message)
        self.counterexamples = counterexamples or []


class ResourceCapError(FavardLabError):
    """A requested generation would exceed the configured cap."""
    exit_code = 3


class ConfigError(FavardLabError):
    """Bad configuration file, key, or value."""
    exit_code = 4


class GeometryError(FavardLabError, ValueError):
    """Invalid similarity system or point configuration."""


class DegenerateConfigurationError(GeometryError):
    """Triangle configuration is colinear or violates the unit-base normalisation."""


class DomainError(FavardLabError, ValueError):
    """Arguments outside the domain of an operation."""


class InfeasibleError(DomainError):
    """No solution exists for the requested constraint system."""


class WindingInstabilityError(FavardLabError):
    """Argument-principle count kept changing under refinement."""


class PlancherelTruncationError(FavardLabError):
    """Fourier-side truncation tail stayed above tolerance."""
