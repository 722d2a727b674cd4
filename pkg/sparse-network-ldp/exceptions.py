"""Error taxonomy shared by every module and mapped to exit codes by main.py."""


class DomainError(ValueError):
    """A precondition on the inputs of an operation does not hold."""


class SizeError(DomainError):
    """A dense computation was requested above the configured cap."""


class NumericError(ArithmeticError):
    """An iterative method failed to meet its convergence contract."""


class ReportIOError(OSError):
    """Reading or writing a file failed. The message always names the path."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = str(reason)
        super().__init__(f"{self.path}: {self.reason}")
