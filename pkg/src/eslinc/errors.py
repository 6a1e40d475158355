"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter or experiment configuration (CLI exit code 2)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the best available estimate and its error bound so callers can
    decide whether to use it anyway.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
