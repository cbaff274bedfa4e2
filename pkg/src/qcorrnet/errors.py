"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class QCorrError(Exception):
    exit_code = 1


class ConfigError(QCorrError, ValueError):
    exit_code = 2


class DataError(QCorrError, ValueError):
    exit_code = 3


class DegeneracyError(QCorrError, ArithmeticError):
    exit_code = 4


class DegenerateSeriesError(DegeneracyError):
    pass


class DegenerateCovarianceError(DegeneracyError):
    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction
