"""Exception hierarchy shared across the package."""


class AmbiguityLabError(Exception):
    """Base class for every error raised by ambiguity_lab."""


class DomainError(AmbiguityLabError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConvergenceError(AmbiguityLabError, RuntimeError):
    pass


class RankError(AmbiguityLabError, ValueError):
    """Design matrix is rank deficient; ``terms`` names the offending columns."""

    def __init__(self, message, terms=()):
        super().__init__(message)
        self.terms = tuple(terms)


class ClusterError(AmbiguityLabError, ValueError):
    pass


class SingularError(AmbiguityLabError, ValueError):
    pass


class ShapeError(AmbiguityLabError, ValueError):
    pass


class DegenerateError(AmbiguityLabError, ValueError):
    pass


class SchemaError(AmbiguityLabError, ValueError):
    pass


class ParseError(AmbiguityLabError, ValueError):
    """Malformed input rows.

    ``problems`` holds ``(line, column, reason)`` triples; ``line``/``column``/``reason``
    mirror the first one.
    """

    def __init__(self, problems):
        problems = list(problems)
        self.problems = problems
        self.line, self.column, self.reason = problems[0]
        head = "; ".join(f"line {ln}, column {col!r}: {why}" for ln, col, why in problems[:5])
        more = f" (+{len(problems) - 5} more)" if len(problems) > 5 else ""
        super().__init__(head + more)


class WeakInstrumentWarning(UserWarning):
    """First-stage F statistic below the conventional threshold of 10."""
