"""Exception types raised across the package."""

from dataclasses import dataclass


class NoteScoreError(Exception):
    """Base class for every error this package raises on bad input."""


class OutOfRange(NoteScoreError, ValueError):
    pass


class ValidationError(NoteScoreError):
    """A test set violates a structural invariant."""


class DanglingReference(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class EmptyTestSet(ValidationError):
    pass


class EmptyInput(NoteScoreError):
    """A rate was requested over zero eligible items."""


class NoCapturedEntities(NoteScoreError):
    pass


class NoAudibleTerms(NoteScoreError):
    pass


class MissingComponent(NoteScoreError):
    pass


class UnsupportedFormat(NoteScoreError):
    pass


class InfeasibleProfile(NoteScoreError):
    pass


class InputTooLarge(NoteScoreError):
    pass


class IoError(NoteScoreError, OSError):
    pass


@dataclass(frozen=True)
class Issue:
    file: str
    line: int
    reason: str

    def __str__(self):
        return f"{self.file}:{self.line}: {self.reason}"


class ParseError(NoteScoreError):
    """One or more records could not be parsed.

    Every problem found in a load is collected into ``issues`` so callers can
    report them all at once.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "\n".join(f"  {i}" for i in self.issues)
        super().__init__(f"{len(self.issues)} record error(s):\n{lines}")

    @property
    def first(self):
        return self.issues[0]
