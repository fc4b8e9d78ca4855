"""Exception types shared across the package."""


class SmclabError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SmclabError):
    """Invalid input: bad hyperparameters, malformed config, mixed run panels."""


class GuardError(ValidationError):
    """A hard resource guard was hit (e.g. exact enumeration too large)."""


class DegenerateWeightsError(SmclabError):
    """All particle log-weights are -inf: the population has died.

    Filters attach the partial diagnostic trace collected so far as the
    ``trace`` attribute when available.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
