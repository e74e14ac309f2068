"""Simulated SMS front end.

Each sender number maps to an implicit learner; inbound texts go through the
command grammar, and every reply is rendered and segmented so nothing longer
than one SMS part ever leaves the gateway.
"""

from __future__ import annotations

import re

from ..channel import (
    Answer,
    Help,
    Next,
    Start,
    Status,
    Unknown,
    parse_command,
    render_prompt,
    segment_text,
)
from ..errors import TutorError
from ..session import Prompt, eligible_concepts
from .service import TutorService

HELP_TEXT = (
    "Commands: START [concept] begins a lesson, A-D answers a question, "
    "NEXT turns the page, STATUS shows progress, HELP shows this text."
)

_NON_ID = re.compile(r"[^A-Za-z0-9]+")


def sender_learner_id(sender: str) -> str:
    """Stable learner id for a sender address."""
    return "sms-" + (_NON_ID.sub("", sender) or "anon")


class SmsGateway:
    def __init__(self, service: TutorService):
        self.service = service

    def _texts(self, prompts: list[Prompt]) -> list[str]:
        return [render_prompt(p) for p in prompts]

    def _status_text(self, learner_id: str) -> str:
        info = self.service.progress(learner_id)
        records = info["concept_records"]
        done = sum(1 for r in records.values() if r["status"] in ("completed", "skipped"))
        total = len(self.service.course.concepts)
        level = info["learner_level"] or "not assessed yet"
        queue = info["eligible_next"]
        nxt = f" Next: {queue[0]}." if queue else ""
        return f"Level: {level}. Concepts done: {done}/{total}.{nxt}"

    def _resolve_concept(self, learner_id: str, ref: str) -> str | None:
        model = self.service._load(learner_id)
        queue = eligible_concepts(self.service.course, model)
        if not ref:
            return queue[0] if queue else None
        for cid in self.service.course.concept_ids:
            if cid.lower() == ref.lower():
                return cid
        return ref  # let the session layer report the unknown id

    def handle_inbound(self, sender: str, text: str) -> list[str]:
        """Process one inbound message; returns outbound segment payloads."""
        learner_id = self.service.ensure_learner(sender_learner_id(sender), name=sender)
        command = parse_command(text)
        try:
            replies = self._dispatch(learner_id, command)
        except TutorError as exc:
            replies = [exc.message]
        out: list[str] = []
        for reply in replies:
            out.extend(segment.payload for segment in segment_text(reply))
        return out

    def _dispatch(self, learner_id: str, command) -> list[str]:
        if isinstance(command, Help):
            return [HELP_TEXT]
        if isinstance(command, Status):
            return [self._status_text(learner_id)]
        if isinstance(command, Start):
            concept_id = self._resolve_concept(learner_id, command.ref)
            if concept_id is None:
                return ["Nothing left to study: every concept is done."]
            _, prompt = self.service.start(learner_id, concept_id)
            return self._texts([prompt])
        if isinstance(command, Answer):
            session_id = self.service.active_session_id(learner_id)
            if session_id is None:
                return ["No lesson in progress. Send START to begin."]
            prompts, _ = self.service.submit_input(session_id, ord(command.letter) - ord("A"))
            return self._texts(prompts)
        if isinstance(command, Next):
            session_id = self.service.active_session_id(learner_id)
            if session_id is None:
                return ["No lesson in progress. Send START to begin."]
            prompts, _ = self.service.submit_input(session_id, "next")
            return self._texts(prompts)
        if isinstance(command, Unknown):
            shown = "".join(ch for ch in command.raw if " " <= ch <= "~")[:40]
            return [f"Unknown command {shown!r}. Send HELP for the command list."]
        raise AssertionError(f"unhandled command {command!r}")
