"""Exception types raised across the toolkit."""


class MfittError(ValueError):
    """Base class for all domain errors."""


class ParseError(MfittError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderingError(MfittError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"timestamps out of order at index {index}")


class InsufficientDataError(MfittError):
    pass


class DegenerateDataError(MfittError):
    pass


class ConvergenceError(MfittError):
    pass
