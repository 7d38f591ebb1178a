"""Exception types raised across the package."""


class NegativePowerOnNonzeroMean(ValueError):
    """A negative-order multiplier was applied to a field with a mean."""

    def __init__(self, mean_fraction):
        self.mean_fraction = mean_fraction
        super().__init__(
            f"negative power of |k| applied to a field whose zero mode carries "
            f"{mean_fraction:.3e} of its L2 norm; subtract the mean first"
        )


class StepDiverged(RuntimeError):
    """Time stepping produced non-finite values.

    ``time`` is the time the failed step was heading to; ``last_good_time``
    and ``steps_completed`` describe the partial trajectory.
    """

    def __init__(self, time, last_good_time=None, steps_completed=None):
        self.time = time
        self.last_good_time = last_good_time
        self.steps_completed = steps_completed
        super().__init__(f"non-finite state at t={time:.6g}")

    def to_dict(self):
        return {
            "error": "divergence",
            "time": self.time,
            "last_good_time": self.last_good_time,
            "steps_completed": self.steps_completed,
        }


class ExponentMismatch(ValueError):
    """An inequality was called with exponents violating its scaling relation."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None, line=None, column=None):
        self.field = field
        self.line = line
        self.column = column
        where = f"{field}: " if field else ""
        if line is not None:
            where = f"line {line}, column {column}: " + where
        super().__init__(where + message)

    def to_dict(self):
        return {
            "error": "config",
            "field": self.field,
            "line": self.line,
            "column": self.column,
            "message": str(self),
        }
