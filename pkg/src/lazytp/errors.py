"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PlannerError(Exception):
    """Base class for all package errors."""


class PddlError(PlannerError):
    """An error tied to a location in a PDDL source."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 filename: str | None = None):
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename
        super().__init__(self.format())

    def format(self) -> str:
        where = self.filename or "<input>"
        if self.line is not None:
            return f"{where}:{self.line}:{self.col}: {self.message}"
        return f"{where}: {self.message}"

    def with_filename(self, filename: str) -> "PddlError":
        self.filename = filename
        self.args = (self.format(),)
        return self


class PddlSyntaxError(PddlError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None,
                 expected: tuple[str, ...] = (), filename: str | None = None):
        self.expected = tuple(expected)
        if expected:
            message = f"{message} (expected {' or '.join(expected)})"
        super().__init__(message, line, col, filename)


class UnsupportedFeature(PddlError):
    def __init__(self, construct: str, line: int | None = None, col: int | None = None,
                 filename: str | None = None):
        self.construct = construct
        super().__init__(f"unsupported feature: {construct}", line, col, filename)


class SemanticError(PddlError):
    pass


class NonlinearExpression(PlannerError):
    """An expression could not be brought into linear form."""


class UnboundFluent(PlannerError):
    def __init__(self, fluent):
        self.fluent = fluent
        super().__init__(f"fluent {fluent} has no value")


class NonlinearUnderSchedule(PlannerError):
    """A `*=`/`/=` effect or other nonlinear term depends on the schedule."""


class NonconstantRate(PlannerError):
    """A continuous rate refers to a schedule-dependent fluent."""


class NumericalFailure(PlannerError):
    """The LP solver gave up (iteration cap or numerical breakdown)."""


class PoisonedStn(PlannerError):
    """Operation attempted on an STN that has already been found inconsistent."""


class MalformedPlan(PlannerError):
    pass
