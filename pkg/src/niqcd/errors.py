"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ``DataError`` -> 2, ``NumericalError``
(and subclasses) -> 3. Everything else is a plain bug.
"""


class DataError(ValueError):
    """Malformed or out-of-contract input data (bad CSV row, too few points, ...)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced unusable output."""


class IntegrationError(NumericalError):
    """Adaptive quadrature did not converge; carries the partial estimate."""

    def __init__(self, message: str, partial: float, err_estimate: float):
        super().__init__(message)
        self.partial = partial
        self.err_estimate = err_estimate
