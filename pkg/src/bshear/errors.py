"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid build parameters (grid size, scale counts, file formats...)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a usable result."""


class ConvergenceError(NumericalError):
    """Iterative solver stopped before reaching its tolerance.

    Carries the final residual so callers can report partial results.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
