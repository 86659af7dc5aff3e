"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class SpinXbarError(Exception):
    exit_code = 1


class InvalidParameterError(SpinXbarError, ValueError):
    exit_code = 2


class ConfigurationError(SpinXbarError):
    exit_code = 2


class TopologyError(SpinXbarError):
    """Singular or disconnected conductance system."""

    exit_code = 3


class NumericalError(SpinXbarError, ArithmeticError):
    exit_code = 3


class ConvergenceError(NumericalError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ExtrapolationError(InvalidParameterError):
    pass


class CalibrationError(SpinXbarError):
    exit_code = 3


class PartialWriteError(SpinXbarError):
    """Raised when at least one targeted cell failed to switch."""

    exit_code = 1

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
