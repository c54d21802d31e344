"""Exception hierarchy shared by all vove modules."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    kind: str
    message: str
    code: str = ""

    def __str__(self) -> str:
        code = f" [{self.code}]" if self.code else ""
        return f"{self.line}:{self.column}: {self.kind}{code}: {self.message}"


class VoveError(Exception):
    """Base class for every error raised by the package."""


class ModelError(VoveError):
    """Raised when a model (or an embedded predicate) cannot be parsed or checked.

    Carries the full list of diagnostics; ``str()`` shows the first one.
    """

    kind = "ModelError"

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 diagnostics: list[Diagnostic] | None = None):
        if diagnostics is None:
            diagnostics = [Diagnostic(line, column, self.kind, message)]
        self.diagnostics = diagnostics
        self.line = diagnostics[0].line
        self.column = diagnostics[0].column
        super().__init__("; ".join(str(d) for d in diagnostics))


class SyntaxError_(ModelError):
    kind = "SyntaxError"


class UnknownIdentifier(ModelError):
    kind = "UnknownIdentifier"


class TypeMismatch(ModelError):
    kind = "TypeMismatch"


class DuplicateName(ModelError):
    kind = "DuplicateName"


class TypeViolation(VoveError):
    """A computed value falls outside its variable's declared type."""


class InitViolatesType(TypeViolation):
    pass


class UnboundParameter(VoveError):
    pass


class GuardNotSatisfied(VoveError):
    pass


class LimitExceeded(VoveError):
    """State-space exploration hit the configured state limit."""


class SemanticsError(VoveError):
    pass


class SimConfigError(VoveError):
    pass


class BadProbabilitySum(SimConfigError):
    pass


class UnknownActivation(SimConfigError):
    pass


class TaskError(VoveError):
    """Malformed validation task or obligation text."""


class UnknownTechnique(TaskError):
    pass


class ArityMismatch(TaskError):
    pass


class UnresolvedContext(TaskError):
    pass


class QueryError(VoveError):
    """Evaluation failure inside an inspection formula."""
