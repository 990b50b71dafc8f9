"""Exception types raised across the package."""


class DegenerateInputError(ValueError):
    """Input makes a formula undefined (zero denominator, zero-variance signal)."""


class EmptyDataError(ValueError):
    """An estimator received zero samples."""


class NumericalDegeneracyError(ArithmeticError):
    """A matrix lost positive definiteness during an update or evaluation."""


class DivergenceError(RuntimeError):
    """Non-finite values appeared while running the neural dynamics."""

    def __init__(self, message, iteration=None, sample_index=None):
        super().__init__(message)
        self.iteration = iteration
        self.sample_index = sample_index


class InfeasibleSamplerError(RuntimeError):
    """Rejection sampling acceptance rate is too small to be usable."""


class DegenerateMixingError(RuntimeError):
    """Could not draw a full-column-rank mixing matrix."""


class ConfigError(ValueError):
    """Experiment configuration failed validation.

    ``path`` is the dotted location of the offending field.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
