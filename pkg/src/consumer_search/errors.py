"""Exception types raised across the package."""


class SearchModelError(Exception):
    """Base class for all errors raised by consumer_search."""


class InvalidArgumentError(SearchModelError, ValueError):
    pass


class ResourceBoundError(SearchModelError):
    """Requested computation exceeds a documented size limit."""


class NonErgodicError(SearchModelError, ValueError):
    pass


class UnsupportedConfigurationError(SearchModelError, ValueError):
    pass


class InconsistencyError(SearchModelError, ArithmeticError):
    """A linear system was over-determined and the extra equation failed.

    The offending residual is kept on ``residual``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
