"""The tutoring service: one object owning the course, the store, cached
learner models, and the active-session registry.

All mutations for a learner are serialized through a per-learner lock, and
every session-module event is flushed to the store before the call returns,
so the log always matches what callers observed.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from typing import Callable, Sequence

from ..config import EngineConfig
from ..errors import ActiveSessionExists, ConceptNotEligible, UnknownSession
from ..kb import CourseGraph
from ..learner import (
    LearnerModel,
    Questionnaire,
    StyleProfile,
    profile_styles,
)
from ..seeds import derive_seed
from ..session import (
    Prompt,
    Session,
    SessionState,
    TERMINAL_STATES,
    eligible_concepts,
    start_session,
    submit,
)
from ..store import Event, EventKind, EventStore


class TutorService:
    def __init__(
        self,
        course: CourseGraph,
        questionnaire: Questionnaire,
        store: EventStore,
        cfg: EngineConfig | None = None,
        seed: int = 0,
    ):
        self.course = course
        self.questionnaire = questionnaire
        self.store = store
        self.cfg = cfg or EngineConfig()
        self.seed = seed
        self._models: dict[str, LearnerModel] = {}
        self._sessions: dict[str, Session] = {}
        self._active: dict[str, str] = {}          # learner id -> session id
        self._session_counts: dict[str, int] = {}  # sessions ever started
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._registry_lock = threading.Lock()

    # -- learner lifecycle ------------------------------------------------------

    def create_learner(self, name: str = "") -> str:
        with self._registry_lock:
            learner_id = self.store.register_learner(name)
        self._models[learner_id] = LearnerModel(learner_id=learner_id)
        self._session_counts[learner_id] = 0
        return learner_id

    def ensure_learner(self, learner_id: str, name: str = "") -> str:
        """Idempotent registration under a caller-chosen id (SMS senders)."""
        with self._registry_lock:
            return self.store.register_learner(name, learner_id=learner_id)

    def _load(self, learner_id: str) -> LearnerModel:
        """Model from cache, or rebuilt from the store (also restoring any
        active session that was open when the process last stopped)."""
        if learner_id in self._models:
            return self._models[learner_id]
        model, session = self.store.load_state(learner_id)
        self._models[learner_id] = model
        self._session_counts[learner_id] = sum(
            1 for e in self.store.events(learner_id)
            if e.kind is EventKind.SESSION_STARTED)
        if session is not None:
            self._sessions[session.session_id] = session
            self._active[learner_id] = session.session_id
        return model

    def _flush(self, session: Session) -> None:
        pending = session.transcript
        session.transcript = []
        self.store.append_all(pending)

    # -- operations ----------------------------------------------------------------

    def submit_profiler(
        self, learner_id: str, answers: Sequence[tuple[str, str]]
    ) -> StyleProfile:
        with self._locks[learner_id]:
            model = self._load(learner_id)
            profile = profile_styles(answers, self.questionnaire)
            model.style_profile = profile
            self.store.append(Event(
                sequence=None, learner_id=learner_id, timestamp=None,
                kind=EventKind.PROFILE_SUBMITTED,
                payload={
                    "answers": [[item, option] for item, option in answers],
                    "profile": profile.to_dict(),
                },
            ))
            return profile

    def progress(self, learner_id: str) -> dict:
        with self._locks[learner_id]:
            model = self._load(learner_id)
            return {
                "learner_id": learner_id,
                "name": self.store.learner_name(learner_id),
                "learner_level": model.learner_level.value if model.learner_level else None,
                "style": model.style_profile.dominant.value,
                "concept_records": {
                    cid: {
                        "status": rec.status.value,
                        "attempts": rec.attempts,
                        "conceptual_level": rec.conceptual_level.value if rec.conceptual_level else None,
                        "objective_level": rec.objective_level.value if rec.objective_level else None,
                    }
                    for cid, rec in sorted(model.concept_records.items())
                },
                "eligible_next": eligible_concepts(self.course, model),
            }

    def start(self, learner_id: str, concept_id: str | None = None) -> tuple[str, Prompt]:
        """Open a session. With no concept named, takes the first eligible one."""
        with self._locks[learner_id]:
            model = self._load(learner_id)
            active_id = self._active.get(learner_id)
            if active_id and self._sessions[active_id].state not in TERMINAL_STATES:
                raise ActiveSessionExists(
                    f"learner {learner_id!r} already has session {active_id!r}",
                    session_id=active_id)
            if concept_id is None:
                queue = eligible_concepts(self.course, model)
                if not queue:
                    raise ConceptNotEligible("no concept is eligible to start")
                concept_id = queue[0]
            n = self._session_counts.get(learner_id, 0) + 1
            session_id = f"{learner_id}-s{n}"
            seed = derive_seed(self.seed, "session", learner_id, n)
            session, prompt = start_session(
                self.course, model, concept_id, seed, self.cfg, session_id=session_id)
            self._session_counts[learner_id] = n
            self._sessions[session_id] = session
            self._active[learner_id] = session_id
            self._flush(session)
            return session_id, prompt

    def _find_session(self, session_id: str) -> Session | None:
        """Look up a session, reloading its owner after a process restart
        (session ids embed the learner id as ``<learner>-s<n>``)."""
        session = self._sessions.get(session_id)
        if session is None and "-s" in session_id:
            learner_id = session_id.rsplit("-s", 1)[0]
            if self.store.learner_exists(learner_id):
                self._load(learner_id)
                session = self._sessions.get(session_id)
        return session

    def submit_input(self, session_id: str, user_input: int | str) -> tuple[list[Prompt], SessionState]:
        session = self._find_session(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id!r}", session_id=session_id)
        with self._locks[session.learner_id]:
            model = self._load(session.learner_id)
            session, model, prompts = submit(session, model, self.course, user_input, self.cfg)
            self._flush(session)
            if session.state in TERMINAL_STATES:
                self._active.pop(session.learner_id, None)
            return prompts, session.state

    def active_session_id(self, learner_id: str) -> str | None:
        self._load(learner_id)
        return self._active.get(learner_id)

    def session(self, session_id: str) -> Session:
        session = self._find_session(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id!r}", session_id=session_id)
        return session


def build_service(
    course: CourseGraph,
    questionnaire: Questionnaire,
    data_dir,
    cfg: EngineConfig | None = None,
    fsync: bool = True,
    seed: int = 0,
    clock: Callable[[], int] | None = None,
) -> TutorService:
    cfg = cfg or EngineConfig()
    store = EventStore(data_dir, course, cfg, fsync=fsync, clock=clock)
    return TutorService(course, questionnaire, store, cfg, seed=seed)
