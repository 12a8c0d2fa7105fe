"""Exception hierarchy shared by all qexplain modules."""

from __future__ import annotations


class QExplainError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class ValidationError(QExplainError):
    pass


class ArityMismatch(ValidationError):
    def __init__(self, predicate: str, row=None, expected: int | None = None):
        self.predicate = predicate
        self.row = row
        self.expected = expected
        msg = f"arity mismatch for {predicate}"
        if expected is not None:
            msg += f" (expected {expected})"
        if row is not None:
            msg += f": {row!r}"
        super().__init__(msg)


class UnknownPredicate(ValidationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown predicate {name!r}")


class DuplicateTid(ValidationError):
    def __init__(self, tid: str):
        self.tid = tid
        super().__init__(f"duplicate tid {tid!r}")


class ParseError(QExplainError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class HeadVariableNotInBody(ParseError):
    pass


class NonBooleanQuery(QExplainError):
    pass


class UnboundVariable(QExplainError):
    def __init__(self, tid: str):
        self.tid = tid
        super().__init__(f"no truth value for variable {tid!r}")


class TooManyVariables(QExplainError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"{count} variables exceed the enumeration cap of {cap}")


class QueryNotTrue(QExplainError):
    pass


class UnknownTid(QExplainError):
    def __init__(self, tid: str):
        self.tid = tid
        super().__init__(f"unknown tid {tid!r}")


class InconsistentInput(QExplainError):
    pass


class ExplosionGuard(QExplainError):
    pass


class InvalidParams(QExplainError):
    pass


class NonNumericPosition(QExplainError):
    pass
