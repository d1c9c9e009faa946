"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`PVSubspaceError`.  The three intermediate classes map onto the CLI
exit codes: configuration/input problems (2), model evaluation failures (3)
and numerical failures (4).
"""


class PVSubspaceError(Exception):
    exit_code = 1


class ConfigError(PVSubspaceError, ValueError):
    """Invalid configuration or input value."""

    exit_code = 2

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class OutOfBounds(ConfigError):
    def __init__(self, name, value, lower, upper):
        self.name = name
        self.value = value
        super().__init__(name, f"value {value!r} outside [{lower!r}, {upper!r}]")


class NonPositiveLogInput(ConfigError):
    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(name, f"log-transformed parameter must be > 0, got {value!r}")


class DimensionMismatch(ConfigError):
    def __init__(self, message):
        super().__init__("dimension", message)


class BadDimension(ConfigError):
    def __init__(self, message):
        super().__init__("n", message)


class ModelFailure(PVSubspaceError):
    """A model evaluation raised or returned a non-finite value."""

    exit_code = 3

    def __init__(self, message, *, sample=None, component=None, cause=None):
        self.sample = sample
        self.component = component
        self.cause = cause
        self.detail = message
        where = []
        if sample is not None:
            where.append(f"sample {sample}")
        if component is not None:
            where.append(f"perturbation {component}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ChildFailure(ModelFailure):
    def __init__(self, returncode, stderr, point_index=None):
        self.returncode = returncode
        self.stderr = stderr
        self.point_index = point_index
        excerpt = stderr.strip()[-400:]
        super().__init__(
            f"model process exited with code {returncode} at point {point_index}: {excerpt}",
            sample=point_index,
        )


class ParseFailure(ModelFailure):
    def __init__(self, line_number, line):
        self.line_number = line_number
        self.line = line
        super().__init__(f"cannot parse model output line {line_number}: {line!r}")


class BudgetExceeded(ConfigError):
    def __init__(self, requested, cap):
        self.requested = requested
        self.cap = cap
        super().__init__("qpoints", f"{requested} model evaluations exceed the cap of {cap}")


class NumericalError(PVSubspaceError, ArithmeticError):
    exit_code = 4


class NoConvergence(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class ExponentOverflow(NumericalError, OverflowError):
    pass


class NotSymmetric(NumericalError):
    pass


class NotOrthonormal(NumericalError):
    pass


class NonFiniteGradient(NumericalError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"gradient {index} contains non-finite entries")


class RankDeficient(NumericalError):
    pass


class InsufficientPoints(NumericalError):
    pass


class AllZero(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass
