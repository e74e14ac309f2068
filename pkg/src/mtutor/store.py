"""Event-sourced persistence.

Each learner owns an append-only newline-delimited JSON log; every line
carries a CRC32 so truncation or tampering is detected at the damaged
sequence. Learner state is never stored as mutable rows: it is re-derived by
replaying the log through the session module, which doubles as a correctness
check (replay must regenerate exactly the derived events the log recorded).
Snapshots cut replay short and also capture a mid-session resume point.
"""

from __future__ import annotations

import json
import os
import re
import time
import zlib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

from .config import EngineConfig
from .errors import (
    CorruptLog,
    IoFailure,
    ReplayMismatch,
    SequenceConflict,
    UnknownLearner,
)
from .learner import LearnerModel, StyleProfile, model_from_dict, model_to_dict

if TYPE_CHECKING:
    from .kb import CourseGraph
    from .session import Session


class EventKind(Enum):
    PROFILE_SUBMITTED = "profile_submitted"
    SESSION_STARTED = "session_started"
    ANSWER_SUBMITTED = "answer_submitted"
    PAGE_ADVANCED = "page_advanced"
    PHASE_FINALIZED = "phase_finalized"
    SESSION_CLOSED = "session_closed"


# Kinds that carry learner input; the others are derived by the engine and are
# verified, not applied, during replay.
INPUT_KINDS = frozenset({
    EventKind.PROFILE_SUBMITTED,
    EventKind.SESSION_STARTED,
    EventKind.ANSWER_SUBMITTED,
    EventKind.PAGE_ADVANCED,
})


@dataclass
class Event:
    sequence: int | None
    learner_id: str
    timestamp: int | None  # milliseconds since epoch, set on append
    kind: EventKind
    payload: dict


@dataclass
class Snapshot:
    learner_id: str
    as_of_sequence: int
    model: dict
    session: dict | None


_LINE_KEYS = ("seq", "lid", "ts", "kind", "payload")
_SAFE_ID = re.compile(r"[^A-Za-z0-9_-]")


def _canonical(obj):
    """Recursively sort mapping keys so serialization is byte-stable."""
    if isinstance(obj, dict):
        return {k: _canonical(obj[k]) for k in sorted(obj)}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def encode_event(event: Event) -> str:
    """One log line: the documented field order plus a trailing crc32 over the
    line without the crc field."""
    base = {
        "seq": event.sequence,
        "lid": event.learner_id,
        "ts": event.timestamp,
        "kind": event.kind.value,
        "payload": _canonical(event.payload),
    }
    body = json.dumps(base, separators=(",", ":"), ensure_ascii=True)
    base["crc32"] = f"{zlib.crc32(body.encode('utf-8')) & 0xFFFFFFFF:08x}"
    return json.dumps(base, separators=(",", ":"), ensure_ascii=True)


def decode_event(line: str, expected_seq: int) -> Event:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError:
        raise CorruptLog("damaged log line", sequence=expected_seq)
    if not isinstance(doc, dict) or set(doc) != set(_LINE_KEYS) | {"crc32"}:
        raise CorruptLog("log line has the wrong shape", sequence=expected_seq)
    base = {k: _canonical(doc[k]) if k == "payload" else doc[k] for k in _LINE_KEYS}
    body = json.dumps(base, separators=(",", ":"), ensure_ascii=True)
    crc = f"{zlib.crc32(body.encode('utf-8')) & 0xFFFFFFFF:08x}"
    if crc != doc["crc32"]:
        raise CorruptLog("crc mismatch", sequence=expected_seq)
    try:
        kind = EventKind(doc["kind"])
    except ValueError:
        raise CorruptLog(f"unknown event kind {doc['kind']!r}", sequence=expected_seq)
    return Event(
        sequence=doc["seq"], learner_id=doc["lid"], timestamp=doc["ts"],
        kind=kind, payload=doc["payload"],
    )


class EventStore:
    """File-backed store: one directory per learner holding meta.json, the
    event log, and at most one snapshot."""

    def __init__(
        self,
        data_dir: str | os.PathLike,
        course: "CourseGraph",
        cfg: EngineConfig | None = None,
        fsync: bool = True,
        clock: Callable[[], int] | None = None,
    ):
        self.root = Path(data_dir)
        self.course = course
        self.cfg = cfg or EngineConfig()
        self.fsync = fsync
        self.clock = clock or (lambda: int(time.time() * 1000))
        self._last_seq: dict[str, int] = {}
        try:
            (self.root / "learners").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoFailure(f"cannot create data directory: {exc}")

    # -- learner registry ------------------------------------------------------

    def _dir(self, learner_id: str) -> Path:
        return self.root / "learners" / learner_id

    def _log_path(self, learner_id: str) -> Path:
        return self._dir(learner_id) / "events.ndjson"

    def learner_exists(self, learner_id: str) -> bool:
        return (self._dir(learner_id) / "meta.json").is_file()

    def list_learners(self) -> list[str]:
        base = self.root / "learners"
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir() if (p / "meta.json").is_file())

    def register_learner(self, name: str = "", learner_id: str | None = None) -> str:
        """Create a learner. With no explicit id, allocate the next L-number."""
        if learner_id is None:
            taken = self.list_learners()
            n = 1
            while f"L{n:06d}" in taken:
                n += 1
            learner_id = f"L{n:06d}"
        else:
            learner_id = _SAFE_ID.sub("_", learner_id)
            if self.learner_exists(learner_id):
                return learner_id
        d = self._dir(learner_id)
        try:
            d.mkdir(parents=True, exist_ok=True)
            (d / "meta.json").write_text(json.dumps({
                "learner_id": learner_id, "name": name, "created_ts": self.clock(),
            }), encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot register learner: {exc}")
        return learner_id

    def learner_name(self, learner_id: str) -> str:
        self._require(learner_id)
        doc = json.loads((self._dir(learner_id) / "meta.json").read_text(encoding="utf-8"))
        return doc.get("name", "")

    def _require(self, learner_id: str) -> None:
        if not self.learner_exists(learner_id):
            raise UnknownLearner(f"no learner {learner_id!r}", learner_id=learner_id)

    # -- the log -----------------------------------------------------------------

    def last_sequence(self, learner_id: str) -> int:
        if learner_id in self._last_seq:
            return self._last_seq[learner_id]
        last = 0
        path = self._log_path(learner_id)
        if path.is_file():
            for event in self.events(learner_id):
                last = event.sequence
        self._last_seq[learner_id] = last
        return last

    def append(self, event: Event) -> int:
        """Append one event, assigning sequence and timestamp when unset.
        Durable before return when fsync is on."""
        self._require(event.learner_id)
        expected = self.last_sequence(event.learner_id) + 1
        if event.sequence is None:
            event.sequence = expected
        elif event.sequence != expected:
            raise SequenceConflict(
                f"sequence {event.sequence} for learner {event.learner_id!r}, "
                f"expected {expected}",
                got=event.sequence, expected=expected)
        if event.timestamp is None:
            event.timestamp = self.clock()
        line = encode_event(event)
        try:
            with open(self._log_path(event.learner_id), "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                if self.fsync:
                    os.fsync(fh.fileno())
        except OSError as exc:
            raise IoFailure(f"append failed: {exc}")
        self._last_seq[event.learner_id] = event.sequence
        return event.sequence

    def append_all(self, events: Iterable[Event]) -> list[int]:
        return [self.append(e) for e in events]

    def events(self, learner_id: str) -> list[Event]:
        """All events for a learner, verified (crc, contiguous sequence)."""
        self._require(learner_id)
        path = self._log_path(learner_id)
        if not path.is_file():
            return []
        out: list[Event] = []
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read log: {exc}")
        for lineno, line in enumerate(raw.splitlines(), start=1):
            expected = lineno
            event = decode_event(line, expected)
            if event.sequence != expected:
                raise CorruptLog(
                    f"sequence {event.sequence} at line {lineno}, expected {expected}",
                    sequence=expected)
            out.append(event)
        return out

    # -- state reconstruction -------------------------------------------------------

    def _snapshot_path(self, learner_id: str) -> Path:
        return self._dir(learner_id) / "snapshot.json"

    def _read_snapshot(self, learner_id: str) -> Snapshot | None:
        path = self._snapshot_path(learner_id)
        if not path.is_file():
            return None
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptLog(f"unreadable snapshot: {exc}", sequence=0)
        return Snapshot(
            learner_id=learner_id,
            as_of_sequence=doc["as_of_seq"],
            model=doc["model"],
            session=doc.get("session"),
        )

    def load_state(self, learner_id: str) -> tuple[LearnerModel, "Session | None"]:
        """Rebuild the learner model and any active session by folding the
        event log, starting from the snapshot when one exists."""
        from .session import TERMINAL_STATES, session_from_dict

        self._require(learner_id)
        snap = self._read_snapshot(learner_id)
        if snap is not None:
            model = model_from_dict(snap.model)
            session = (session_from_dict(snap.session, self.course)
                       if snap.session is not None else None)
            as_of = snap.as_of_sequence
        else:
            model = LearnerModel(learner_id=learner_id)
            session = None
            as_of = 0
        events = self.events(learner_id)
        if events and as_of > events[-1].sequence:
            raise CorruptLog("snapshot is ahead of the log", sequence=as_of)
        if not events and as_of > 0:
            raise CorruptLog("snapshot is ahead of the log", sequence=as_of)
        tail = [e for e in events if e.sequence > as_of]
        model, session = _replay(self.course, self.cfg, model, session, tail)
        if session is not None and session.state in TERMINAL_STATES:
            session = None
        return model, session

    def load_learner(self, learner_id: str) -> LearnerModel:
        return self.load_state(learner_id)[0]

    def snapshot(self, learner_id: str) -> Snapshot:
        """Fold current state and persist it so later loads replay only the
        tail written after this point."""
        from .session import session_to_dict

        model, session = self.load_state(learner_id)
        snap = Snapshot(
            learner_id=learner_id,
            as_of_sequence=self.last_sequence(learner_id),
            model=model_to_dict(model),
            session=session_to_dict(session) if session is not None else None,
        )
        doc = {"as_of_seq": snap.as_of_sequence, "model": snap.model, "session": snap.session}
        try:
            self._snapshot_path(learner_id).write_text(
                json.dumps(_canonical(doc), separators=(",", ":")), encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot write snapshot: {exc}")
        return snap


def _replay(
    course: "CourseGraph",
    cfg: EngineConfig,
    model: LearnerModel,
    session: "Session | None",
    events: Sequence[Event],
) -> tuple[LearnerModel, "Session | None"]:
    """Re-drive logged inputs through the session module and verify that every
    derived event comes out exactly as logged."""
    from .session import TERMINAL_STATES, start_session, submit

    def verify(emitted: list[Event], expected: Sequence[Event], at: int) -> None:
        if len(emitted) > len(expected):
            raise ReplayMismatch("log ends before the events replay regenerates",
                                 sequence=at)
        for off, event in enumerate(emitted):
            logged = expected[off]
            if event.kind is not logged.kind or _canonical(event.payload) != _canonical(logged.payload):
                raise ReplayMismatch(
                    f"replayed {event.kind.value} disagrees with the log",
                    sequence=logged.sequence)

    i = 0
    while i < len(events):
        e = events[i]
        if e.kind is EventKind.PROFILE_SUBMITTED:
            model.style_profile = StyleProfile.from_dict(e.payload["profile"])
            i += 1
            continue
        if e.kind not in INPUT_KINDS:
            raise ReplayMismatch(
                f"derived event {e.kind.value} has no driving input", sequence=e.sequence)
        if e.kind is EventKind.SESSION_STARTED:
            if session is not None and session.state not in TERMINAL_STATES:
                raise ReplayMismatch("session started while another is active",
                                     sequence=e.sequence)
            session, _ = start_session(
                course, model, e.payload["concept_id"], e.payload["seed"],
                cfg, session_id=e.payload["session_id"])
        else:
            if session is None or session.state in TERMINAL_STATES:
                raise ReplayMismatch("input event without an active session",
                                     sequence=e.sequence)
            if e.kind is EventKind.ANSWER_SUBMITTED:
                session, model, _ = submit(session, model, course, e.payload["choice"], cfg)
            else:
                session, model, _ = submit(session, model, course, "next", cfg)
        emitted = session.transcript
        session.transcript = []
        verify(emitted, events[i:], e.sequence)
        i += len(emitted)
    return model, session
