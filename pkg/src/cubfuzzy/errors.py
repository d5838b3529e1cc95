"""Exception hierarchy shared by the fitting, fuzzification and I/O layers."""


class CubFuzzyError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CubFuzzyError, ValueError):
    """An argument lies outside the domain of the operation."""


class EstimationError(CubFuzzyError):
    """A closed-form estimator has no solution for the supplied inputs."""


class DegenerateDataError(CubFuzzyError):
    """Observed data cannot identify the model (e.g. a single category)."""


class NumericalError(CubFuzzyError, ArithmeticError):
    """Non-finite likelihood or a zero-probability observation."""

    def __init__(self, message, category=None):
        super().__init__(message)
        self.category = category


class DegenerateNormalizationError(CubFuzzyError):
    """A membership recursion would divide by an empty block of mass."""

    def __init__(self, message, item=None):
        super().__init__(message)
        self.item = item


class IFSConsistencyError(CubFuzzyError):
    """Membership plus non-membership exceeds one at some category."""

    def __init__(self, message, category=None):
        super().__init__(message)
        self.category = category


class RowRejected(CubFuzzyError):
    """A respondent row cannot be aggregated under the active missing policy."""


class ValidationError(CubFuzzyError):
    """Input ratings fail range or shape checks.

    ``issues`` holds ``(line, item, value)`` tuples for each offending cell.
    """

    def __init__(self, message, issues=(), report=None):
        super().__init__(message)
        self.issues = list(issues)
        self.report = report


class ParseError(ValidationError):
    """A CSV cell could not be parsed as an integer rating."""

    def __init__(self, message, line=None, issues=(), report=None):
        super().__init__(message, issues, report)
        self.line = line
