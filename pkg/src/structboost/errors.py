"""Exception types raised across the package.

Each carries the CLI exit code it maps to.
"""


class StructBoostError(Exception):
    exit_code = 1


class InvalidInputError(StructBoostError, ValueError):
    exit_code = 2


class ParseError(InvalidInputError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SubmodularityError(InvalidInputError):
    pass


class ConvergenceError(StructBoostError):
    exit_code = 3

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class SolverFailure(ConvergenceError):
    pass


class CapacityError(StructBoostError):
    exit_code = 4
