"""Failure types. Every error carries the CLI exit code it maps to."""

EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class CursekitError(Exception):
    exit_code = EXIT_NUMERICAL

    def __init__(self, detail, exit_code=None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ParameterError(CursekitError, ValueError):
    exit_code = EXIT_USAGE


class PointSetParseError(CursekitError):
    exit_code = EXIT_USAGE

    def __init__(self, line_no, detail):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no


class QuadratureError(CursekitError):
    def __init__(self, detail, best, residual):
        super().__init__(f"{detail} (best estimate {best!r}, residual {residual!r})")
        self.best = best
        self.residual = residual


class NoDecomposablePartError(CursekitError):
    pass


class PropertyViolation(CursekitError):
    def __init__(self, prop, detail):
        super().__init__(f"property {prop} violated: {detail}")
        self.prop = prop


class DivergenceError(CursekitError):
    pass


class BudgetExceededError(CursekitError):
    pass


class UnsupportedError(CursekitError):
    pass
