"""Exception hierarchy shared by all nsraise modules."""


class NSRaiseError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NSRaiseError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConfigurationError(NSRaiseError, ValueError):
    pass


class DimensionError(NSRaiseError, ValueError):
    pass


class InsufficientDataError(NSRaiseError, ValueError):
    pass


class SingularDesignError(NSRaiseError, ArithmeticError):
    """Design matrix is rank deficient.

    ``columns`` lists the indices of the columns involved in the (near)
    linear dependence.
    """

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class UnsupportedOperationError(NSRaiseError):
    pass


class DegenerateColumnError(NSRaiseError, ValueError):
    pass


class UnmitigableCollinearityError(NSRaiseError):
    pass


class CalibrationError(NSRaiseError):
    pass


class QuoteParseError(NSRaiseError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BootstrapError(NSRaiseError, ValueError):
    pass


class ArbitrageError(BootstrapError):
    pass


class DegenerateTestError(NSRaiseError, ArithmeticError):
    pass


class MetricUnavailableError(NSRaiseError):
    pass
