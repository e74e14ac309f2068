"""Error hierarchy shared by all modules.

Every error carries a stable machine-readable ``code`` (the class name) that the
HTTP gateway puts on the wire, so client-side mappings can be checked for
exhaustiveness against :func:`error_codes`.
"""

from __future__ import annotations

from typing import Any


class TutorError(Exception):
    """Base class for all engine errors."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        body: dict = {"code": self.code, "message": self.message}
        if self.details:
            body["details"] = self.details
        return body


# -- course / file parsing ---------------------------------------------------

class ParseError(TutorError):
    """Malformed input file; ``line``/``column`` point at the problem when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message, line=line, column=column)
        self.line = line
        self.column = column


class ValidationError(TutorError):
    """A loaded course violates one or more invariants. ``violations`` is a list
    of objects with ``rule``, ``entity`` and ``message`` attributes."""

    def __init__(self, violations: list):
        listing = "; ".join(f"{v.rule}[{v.entity}]" for v in violations)
        super().__init__(f"{len(violations)} violation(s): {listing}")
        self.violations = violations

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "details": {
                "violations": [
                    {"rule": v.rule, "entity": v.entity, "message": v.message}
                    for v in self.violations
                ]
            },
        }


# -- learner model -----------------------------------------------------------

class UnknownItem(TutorError):
    pass


class UnknownOption(TutorError):
    pass


class DuplicateAnswer(TutorError):
    pass


class OutOfRange(TutorError):
    pass


class NoActivePhase(TutorError):
    pass


class AlreadyAnswered(TutorError):
    pass


class EmptyPhase(TutorError):
    pass


# -- assessment --------------------------------------------------------------

class InsufficientQuestions(TutorError):
    """The bank cannot satisfy a test plan without repeating questions."""

    def __init__(self, section_id: str, band: list[int], needed: int, available: int):
        super().__init__(
            f"section {section_id}: need {needed} unused questions in difficulty "
            f"band {band}, only {available} available",
            section=section_id, band=band, needed=needed, available=available,
        )
        self.section_id = section_id
        self.band = band
        self.needed = needed
        self.available = available


class LengthMismatch(TutorError):
    pass


# -- session -----------------------------------------------------------------

class ConceptNotEligible(TutorError):
    pass


class ActiveSessionExists(TutorError):
    pass


class SessionTerminal(TutorError):
    pass


class WrongInputKind(TutorError):
    pass


class ChoiceOutOfRange(TutorError):
    pass


class ReplayMismatch(TutorError):
    """An event log disagrees with what deterministic replay regenerates."""


# -- channel -----------------------------------------------------------------

class EmptyPayload(TutorError):
    pass


class NonPrintable(TutorError):
    pass


class TooLong(TutorError):
    pass


class MissingSegment(TutorError):
    def __init__(self, index: int):
        super().__init__(f"segment {index} missing", index=index)
        self.index = index


class DuplicateSegment(TutorError):
    def __init__(self, index: int):
        super().__init__(f"segment {index} duplicated", index=index)
        self.index = index


class InconsistentTotal(TutorError):
    pass


# -- store -------------------------------------------------------------------

class SequenceConflict(TutorError):
    pass


class IoFailure(TutorError):
    pass


class UnknownLearner(TutorError):
    pass


class CorruptLog(TutorError):
    def __init__(self, message: str, sequence: int):
        super().__init__(message, sequence=sequence)
        self.sequence = sequence


# -- gateway -----------------------------------------------------------------

class UnknownConcept(TutorError):
    pass


class UnknownSession(TutorError):
    pass


def error_codes() -> list[str]:
    """All registered error codes, sorted. Served by the gateway so clients can
    verify their message maps are exhaustive."""
    found: set[str] = set()
    stack: list[type] = [TutorError]
    while stack:
        cls = stack.pop()
        for sub in cls.__subclasses__():
            found.add(sub.__name__)
            stack.append(sub)
    return sorted(found)
