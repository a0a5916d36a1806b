"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A parameter lies outside the domain where a quantity is defined."""


class DeltaTooLargeError(InvalidParameterError):
    """The loss is too large for the resonance wavenumber to be positive.

    Attributes
    ----------
    value : float
        The (non-positive) resonance wavenumber that was computed.
    """

    def __init__(self, message, value):
        super().__init__(message)
        self.value = value


class IntegrationError(RuntimeError):
    """A quadrature failed to reach its tolerance.

    Attributes
    ----------
    estimate : float
        Best value obtained.
    error : float
        Achieved error estimate.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NotApplicableError(RuntimeError):
    """The preconditions of a bound or certificate are not met."""
