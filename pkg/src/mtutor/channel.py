"""Plain-text message channel: 160-character segmentation with "i/n " part
headers, reassembly, the inbound command grammar, and prompt rendering.

The character model is the printable 7-bit range plus newline; rendered
prompts use newlines for layout, so the channel must carry them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DuplicateSegment,
    EmptyPayload,
    InconsistentTotal,
    MissingSegment,
    NonPrintable,
    TooLong,
)

SEGMENT_LIMIT = 160
MAX_SEGMENTS = 99


def is_printable_text(text: str) -> bool:
    """True when every character is 7-bit printable or a newline."""
    return all(ch == "\n" or 0x20 <= ord(ch) <= 0x7E for ch in text)


@dataclass(frozen=True)
class Segment:
    """One wire message part. ``payload`` is the exact wire text, header
    included when the message was split."""

    index: int
    total: int
    payload: str


# -- commands --------------------------------------------------------------------

@dataclass(frozen=True)
class Answer:
    letter: str  # "A".."D"


@dataclass(frozen=True)
class Next:
    pass


@dataclass(frozen=True)
class Status:
    pass


@dataclass(frozen=True)
class Help:
    pass


@dataclass(frozen=True)
class Start:
    ref: str  # concept id; empty means "first eligible concept"


@dataclass(frozen=True)
class Unknown:
    raw: str


Command = Answer | Next | Status | Help | Start | Unknown


def parse_command(text: str) -> Command:
    """Total parser for inbound messages: trims, ignores case, and never
    raises; anything unrecognized becomes Unknown."""
    trimmed = text.strip()
    upper = trimmed.upper()
    if upper in ("A", "B", "C", "D"):
        return Answer(upper)
    if upper == "NEXT":
        return Next()
    if upper == "STATUS":
        return Status()
    if upper == "HELP":
        return Help()
    parts = trimmed.split(None, 1)
    if parts and parts[0].upper() == "START":
        return Start(parts[1].strip() if len(parts) > 1 else "")
    return Unknown(trimmed)


# -- segmentation ------------------------------------------------------------------

def _header(index: int, total: int) -> str:
    return f"{index}/{total} "


def segment_text(text: str, limit: int = SEGMENT_LIMIT) -> list[Segment]:
    """Split outbound text into wire segments of at most ``limit`` characters.

    A text that fits goes out verbatim as a single headerless segment. Longer
    texts get the smallest part count whose per-part capacities (limit minus
    that part's header) cover the text, filled greedily left to right, so
    reassembly is exact concatenation.
    """
    if not text:
        raise EmptyPayload("cannot send an empty message")
    if not is_printable_text(text):
        raise NonPrintable("message contains characters outside the printable set")
    if len(text) <= limit:
        return [Segment(index=1, total=1, payload=text)]

    for total in range(2, MAX_SEGMENTS + 1):
        capacities = [limit - len(_header(i, total)) for i in range(1, total + 1)]
        if any(c <= 0 for c in capacities):
            break
        if sum(capacities) < len(text):
            continue
        segments: list[Segment] = []
        pos = 0
        for i, capacity in enumerate(capacities, start=1):
            if pos >= len(text):
                break
            chunk = text[pos:pos + capacity]
            pos += len(chunk)
            segments.append(Segment(index=i, total=total, payload=_header(i, total) + chunk))
        return segments
    raise TooLong(f"text of {len(text)} characters needs more than {MAX_SEGMENTS} segments")


def reassemble(segments: list[Segment]) -> str:
    """Rebuild the original text from segments in any order; the inverse of
    segment_text."""
    if not segments:
        raise EmptyPayload("no segments to reassemble")
    totals = {s.total for s in segments}
    if len(totals) != 1:
        raise InconsistentTotal(f"mixed totals {sorted(totals)}")
    total = totals.pop()
    if total < 1:
        raise InconsistentTotal(f"total {total} below 1")

    by_index: dict[int, Segment] = {}
    for s in segments:
        if not 1 <= s.index <= total:
            raise InconsistentTotal(f"index {s.index} outside 1..{total}")
        if s.index in by_index:
            raise DuplicateSegment(s.index)
        by_index[s.index] = s
    for i in range(1, total + 1):
        if i not in by_index:
            raise MissingSegment(i)

    if total == 1:
        return by_index[1].payload
    parts: list[str] = []
    for i in range(1, total + 1):
        seg = by_index[i]
        head = _header(i, total)
        if not seg.payload.startswith(head):
            raise InconsistentTotal(f"segment {i} payload does not carry header {head!r}")
        parts.append(seg.payload[len(head):])
    return "".join(parts)


# -- rendering ----------------------------------------------------------------------

_CHOICE_LETTERS = "ABCD"


def render_prompt(p) -> str:
    """Fixed-layout plain-text rendering of any session prompt."""
    from .session import ContentPage, PhaseResult, QuestionPrompt, SessionResult

    if isinstance(p, QuestionPrompt):
        lines = [p.text]
        for letter, choice in zip(_CHOICE_LETTERS, p.choices):
            lines.append(f"{letter}) {choice}")
        lines.append("Reply A-D")
        return "\n".join(lines)
    if isinstance(p, ContentPage):
        return f"{p.text}\n(p {p.page}/{p.pages}) Reply NEXT"
    if isinstance(p, PhaseResult):
        return f"{p.phase.label}: {p.score}/100 ({p.level.label})"
    if isinstance(p, SessionResult):
        verbs = {"completed": "completed", "skipped": "skipped", "deferred": "deferred"}
        verb = verbs.get(p.status.value, p.status.value)
        if p.level is not None:
            return f"Concept {verb}: {p.level.label}"
        return f"Concept {verb}"
    raise ValueError(f"not a prompt: {p!r}")
