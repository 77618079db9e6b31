"""Exception hierarchy shared by every module.

Each class carries an ``exit_code`` so the CLI can map a failure category to a
process status without string matching.
"""


class RankingError(Exception):
    exit_code = 1


class ParameterError(RankingError, ValueError):
    exit_code = 2


class ParseError(RankingError, ValueError):
    exit_code = 3

    def __init__(self, message: str, line: int | None = None):
        self._args = (message, line)
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

    def __reduce__(self):
        return (type(self), self._args)


class ConvergenceError(RankingError, RuntimeError):
    exit_code = 4

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual
        self._message = message

    def __reduce__(self):
        return (type(self), (self._message, self.residual))


class DegenerateFilterError(RankingError, RuntimeError):
    exit_code = 5


class FeasibilityError(RankingError, RuntimeError):
    exit_code = 6


class InvariantViolation(RankingError, AssertionError):
    exit_code = 7
