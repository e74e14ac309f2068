"""Per-concept tutoring session: pre-test, learning, post-test.

A session walks one learner through one concept. The pre-test can skip the
concept outright (already mastered), a failed post-test repeats the learning
phase with a different presentation method while attempts remain, and a
learner who exhausts the attempt budget has the concept deferred to the back
of the queue. Every state change appends an event to the session transcript
so the whole interaction is replayable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from . import kb as kb_mod
from .assessment import Phase, TestPlan, plan_test
from .config import EngineConfig
from .errors import (
    ChoiceOutOfRange,
    ConceptNotEligible,
    InsufficientQuestions,
    SessionTerminal,
    UnknownConcept,
    WrongInputKind,
)
from .kb import Concept, ContentVariant, CourseGraph, Method
from .learner import (
    ConceptRecord,
    ConceptStatus,
    KnowledgeLevel,
    LearnerModel,
    begin_phase,
    derive_learner_level,
    finalize_phase,
    update_on_answer,
)
from .seeds import derive_seed
from .store import Event, EventKind

log = logging.getLogger(__name__)

NEXT = "next"


class SessionState(Enum):
    CREATED = "created"
    PRE_TEST = "pre_test"
    LEARNING = "learning"
    POST_TEST = "post_test"
    COMPLETED = "completed"
    SKIPPED = "skipped"
    DEFERRED = "deferred"


TERMINAL_STATES = frozenset(
    {SessionState.COMPLETED, SessionState.SKIPPED, SessionState.DEFERRED}
)

# The legal transition relation; submit/start never move a session outside it.
LEGAL_TRANSITIONS: frozenset[tuple[SessionState, SessionState]] = frozenset({
    (SessionState.CREATED, SessionState.PRE_TEST),
    (SessionState.PRE_TEST, SessionState.LEARNING),
    (SessionState.PRE_TEST, SessionState.SKIPPED),
    (SessionState.LEARNING, SessionState.POST_TEST),
    (SessionState.LEARNING, SessionState.DEFERRED),  # bank exhausted mid-course
    (SessionState.POST_TEST, SessionState.COMPLETED),
    (SessionState.POST_TEST, SessionState.LEARNING),
    (SessionState.POST_TEST, SessionState.DEFERRED),
})


# -- prompts -------------------------------------------------------------------

@dataclass(frozen=True)
class QuestionPrompt:
    question_id: str
    text: str
    choices: tuple[str, ...]


@dataclass(frozen=True)
class ContentPage:
    text: str
    page: int   # 1-based
    pages: int


@dataclass(frozen=True)
class PhaseResult:
    phase: Phase
    score: int
    level: KnowledgeLevel


@dataclass(frozen=True)
class SessionResult:
    status: ConceptStatus
    level: KnowledgeLevel | None


Prompt = QuestionPrompt | ContentPage | PhaseResult | SessionResult


def prompt_to_dict(p: Prompt) -> dict:
    """JSON shape of a prompt as served over HTTP."""
    if isinstance(p, QuestionPrompt):
        return {"kind": "question", "question_id": p.question_id,
                "text": p.text, "choices": list(p.choices)}
    if isinstance(p, ContentPage):
        return {"kind": "content", "text": p.text, "page": p.page, "pages": p.pages}
    if isinstance(p, PhaseResult):
        return {"kind": "phase_result", "phase": p.phase.value, "score": p.score,
                "level": p.level.value, "label": p.level.label}
    if isinstance(p, SessionResult):
        return {"kind": "session_result", "status": p.status.value,
                "level": p.level.value if p.level else None,
                "label": p.level.label if p.level else None}
    raise ValueError(f"not a prompt: {p!r}")


# -- decisions -----------------------------------------------------------------

class PretestDecision(Enum):
    SKIP = "skip"
    PROCEED = "proceed"


@dataclass(frozen=True)
class Complete:
    pass


@dataclass(frozen=True)
class Repeat:
    next_method: Method | None  # None: no unused method left, reuse best-ranked


@dataclass(frozen=True)
class Defer:
    pass


PosttestDecision = Complete | Repeat | Defer


def decide_after_pretest(outcome, skip_level: KnowledgeLevel = KnowledgeLevel.EXCELLENT) -> PretestDecision:
    """Skip (remove) the concept when the pre-test already shows mastery."""
    if outcome.level >= skip_level:
        return PretestDecision.SKIP
    return PretestDecision.PROCEED


def decide_after_posttest(
    outcome,
    attempt: int,
    available_methods: set[Method],
    used_methods: frozenset[Method] | set[Method] = frozenset(),
    max_repeats: int = 2,
    pass_level: KnowledgeLevel = KnowledgeLevel.GOOD,
) -> PosttestDecision:
    """Complete on a passing score; otherwise repeat with an unused method
    while attempts remain, else defer the concept."""
    if outcome.level >= pass_level:
        return Complete()
    if attempt <= max_repeats:
        unused = sorted(
            set(available_methods) - set(used_methods),
            key=kb_mod.METHOD_ORDER.index,
        )
        return Repeat(next_method=unused[0] if unused else None)
    return Defer()


# -- the session ----------------------------------------------------------------

@dataclass
class Session:
    session_id: str
    learner_id: str
    concept_id: str
    seed: int
    state: SessionState = SessionState.CREATED
    attempt: int = 1
    current_plan: TestPlan | None = None
    plan_cursor: int = 0
    current_variant: ContentVariant | None = None
    content_cursor: int = 0
    used_methods: set[Method] = field(default_factory=set)
    last_level: KnowledgeLevel | None = None
    transcript: list[Event] = field(default_factory=list)

    def _move(self, new_state: SessionState) -> None:
        if (self.state, new_state) not in LEGAL_TRANSITIONS:
            raise AssertionError(f"illegal transition {self.state} -> {new_state}")
        self.state = new_state

    def _emit(self, kind: EventKind, payload: dict) -> None:
        self.transcript.append(Event(
            sequence=None, learner_id=self.learner_id, timestamp=None,
            kind=kind, payload=payload,
        ))


def _completed_ids(m: LearnerModel) -> set[str]:
    return {
        cid for cid, rec in m.concept_records.items()
        if rec.status in (ConceptStatus.COMPLETED, ConceptStatus.SKIPPED)
    }


def _deferred_ids(g: CourseGraph, m: LearnerModel) -> list[str]:
    return [
        c.id for c in g.concepts
        if m.concept_records.get(c.id, ConceptRecord()).status is ConceptStatus.DEFERRED
    ]


def eligible_concepts(g: CourseGraph, m: LearnerModel) -> list[str]:
    """Concepts the learner may start now, deferred ones at the back."""
    return kb_mod.next_concepts(g, _completed_ids(m), _deferred_ids(g, m))


def _pick_variant(
    concept: Concept, m: LearnerModel, cfg: EngineConfig, exclude: set[Method]
) -> ContentVariant:
    if cfg.forced_method is not None:
        forced = [v for v in concept.variants if v.method is cfg.forced_method]
        if forced:
            return min(forced, key=lambda v: (0 if v.section_id is None else 1, v.index))
    return kb_mod.select_variant(concept, m, exclude_methods=exclude,
                                 matrix=cfg.style_method_matrix)


def _question_prompt(g: CourseGraph, plan: TestPlan, cursor: int) -> QuestionPrompt:
    q = g.bank.question(plan.items[cursor])
    if q is None:
        raise AssertionError(f"plan names unknown question {plan.items[cursor]!r}")
    return QuestionPrompt(question_id=q.id, text=q.prompt, choices=q.choices)


def _content_prompt(s: Session) -> ContentPage:
    pages = s.current_variant.pages
    return ContentPage(text=pages[s.content_cursor], page=s.content_cursor + 1,
                       pages=len(pages))


def start_session(
    g: CourseGraph,
    m: LearnerModel,
    concept_id: str,
    seed: int,
    cfg: EngineConfig | None = None,
    session_id: str | None = None,
) -> tuple[Session, QuestionPrompt]:
    """Open a session on an eligible concept and return its first pre-test
    question. The model is marked in-progress; nothing else is mutated until
    answers arrive."""
    cfg = cfg or EngineConfig()
    concept = g.concept(concept_id)
    if concept is None:
        raise UnknownConcept(f"no concept {concept_id!r} in the course")
    if concept_id not in eligible_concepts(g, m):
        raise ConceptNotEligible(
            f"concept {concept_id!r} is not eligible yet", concept=concept_id)

    count = cfg.count_for(True, len(concept.sections))
    plan = plan_test(
        g.bank, concept, m, Phase.PRE_TEST, count,
        derive_seed(seed, "pre"),
        band_table=cfg.difficulty_bands,
        fallback_level=cfg.initial_learner_level,
    )

    sid = session_id or f"{m.learner_id}-{derive_seed(seed, 'sid') % 10**8:08d}"
    s = Session(session_id=sid, learner_id=m.learner_id, concept_id=concept_id, seed=seed)
    s._emit(EventKind.SESSION_STARTED,
            {"session_id": sid, "concept_id": concept_id, "seed": seed})
    s.current_plan = plan
    s._move(SessionState.PRE_TEST)

    record = m.concept_records.setdefault(concept_id, ConceptRecord())
    record.status = ConceptStatus.IN_PROGRESS
    record.attempts = 1
    begin_phase(m, Phase.PRE_TEST, concept_id)
    log.debug("session %s started on %s (%d questions)", sid, concept_id, len(plan.items))
    return s, _question_prompt(g, plan, 0)


def submit(
    s: Session,
    m: LearnerModel,
    g: CourseGraph,
    user_input: int | str,
    cfg: EngineConfig | None = None,
) -> tuple[Session, LearnerModel, list[Prompt]]:
    """Feed one learner input (answer index during tests, "next" during
    learning) into the session. Returns the prompts to show; boundary steps
    return several (for example a phase result followed by the first content
    page). Errors leave session and model untouched."""
    cfg = cfg or EngineConfig()
    if s.state in TERMINAL_STATES:
        raise SessionTerminal(f"session {s.session_id} already {s.state.value}")

    if s.state in (SessionState.PRE_TEST, SessionState.POST_TEST):
        if isinstance(user_input, bool) or not isinstance(user_input, int):
            raise WrongInputKind("expected an answer index during a test")
        q = g.bank.question(s.current_plan.items[s.plan_cursor])
        if not 0 <= user_input < len(q.choices):
            raise ChoiceOutOfRange(
                f"answer {user_input} outside 0-{len(q.choices) - 1}",
                choice=user_input, choices=len(q.choices))
        correct = user_input == q.correct
        update_on_answer(m, q, correct, chosen=user_input)
        s._emit(EventKind.ANSWER_SUBMITTED, {
            "session_id": s.session_id, "question_id": q.id,
            "choice": user_input, "correct": correct,
        })
        s.plan_cursor += 1
        if s.plan_cursor < len(s.current_plan.items):
            return s, m, [_question_prompt(g, s.current_plan, s.plan_cursor)]
        if s.state is SessionState.PRE_TEST:
            return s, m, _finish_pretest(s, m, g, cfg)
        return s, m, _finish_posttest(s, m, g, cfg)

    if s.state is SessionState.LEARNING:
        if not (isinstance(user_input, str) and user_input.lower() == NEXT):
            raise WrongInputKind('expected "next" during the learning phase')
        s.content_cursor += 1
        s._emit(EventKind.PAGE_ADVANCED,
                {"session_id": s.session_id, "cursor": s.content_cursor})
        if s.content_cursor < len(s.current_variant.pages):
            return s, m, [_content_prompt(s)]
        return s, m, _enter_posttest(s, m, g, cfg)

    raise WrongInputKind(f"session is in state {s.state.value}")


def _phase_payload(s: Session, outcome, decision: str, extra: dict | None = None) -> dict:
    payload = {
        "session_id": s.session_id,
        "phase": outcome.phase.value,
        "score": outcome.score,
        "level": outcome.level.value,
        "conceptual_level": outcome.conceptual_level.value,
        "objective_level": outcome.objective_level.value,
        "attempt": s.attempt,
        "decision": decision,
    }
    if extra:
        payload.update(extra)
    return payload


def _close(s: Session, m: LearnerModel, status: ConceptStatus,
           state: SessionState, reason: str | None = None) -> None:
    record = m.concept_records.setdefault(s.concept_id, ConceptRecord())
    record.status = status
    s._move(state)
    s.current_plan = None
    s.plan_cursor = 0
    payload = {"session_id": s.session_id, "status": status.value}
    if reason:
        payload["reason"] = reason
    s._emit(EventKind.SESSION_CLOSED, payload)


def _enter_learning(s: Session, m: LearnerModel, g: CourseGraph,
                    cfg: EngineConfig) -> ContentPage:
    concept = g.concept(s.concept_id)
    variant = _pick_variant(concept, m, cfg, exclude=s.used_methods)
    s.current_variant = variant
    s.used_methods.add(variant.method)
    s.content_cursor = 0
    s._move(SessionState.LEARNING)
    return _content_prompt(s)


def _finish_pretest(s: Session, m: LearnerModel, g: CourseGraph,
                    cfg: EngineConfig) -> list[Prompt]:
    outcome = finalize_phase(m, s.concept_id)
    m.learner_level = derive_learner_level(outcome.level, m.learner_level)
    s.last_level = outcome.level
    decision = decide_after_pretest(outcome, skip_level=cfg.skip_level)
    prompts: list[Prompt] = [PhaseResult(Phase.PRE_TEST, outcome.score, outcome.level)]

    if decision is PretestDecision.SKIP:
        s._emit(EventKind.PHASE_FINALIZED, _phase_payload(
            s, outcome, "skip", {"learner_level": m.learner_level.value}))
        _close(s, m, ConceptStatus.SKIPPED, SessionState.SKIPPED)
        prompts.append(SessionResult(ConceptStatus.SKIPPED, outcome.level))
        return prompts

    concept = g.concept(s.concept_id)
    variant = _pick_variant(concept, m, cfg, exclude=s.used_methods)
    s._emit(EventKind.PHASE_FINALIZED, _phase_payload(
        s, outcome, "proceed",
        {"learner_level": m.learner_level.value, "next_method": variant.method.value}))
    prompts.append(_enter_learning(s, m, g, cfg))
    return prompts


def _posttest_plan(s: Session, m: LearnerModel, g: CourseGraph,
                   cfg: EngineConfig, attempt: int) -> TestPlan:
    concept = g.concept(s.concept_id)
    count = cfg.count_for(False, len(concept.sections))
    return plan_test(
        g.bank, concept, m, Phase.POST_TEST, count,
        derive_seed(s.seed, "post", attempt),
        band_table=cfg.difficulty_bands,
        fallback_level=cfg.initial_learner_level,
    )


def _enter_posttest(s: Session, m: LearnerModel, g: CourseGraph,
                    cfg: EngineConfig) -> list[Prompt]:
    try:
        plan = _posttest_plan(s, m, g, cfg, s.attempt)
    except InsufficientQuestions:
        # defensive: with a validated course and default sizing the repeat
        # decision prechecks this and defers there instead
        log.warning("session %s: question bank exhausted entering post-test", s.session_id)
        _close(s, m, ConceptStatus.DEFERRED, SessionState.DEFERRED, reason="bank-exhausted")
        return [SessionResult(ConceptStatus.DEFERRED, s.last_level)]
    s.current_plan = plan
    s.plan_cursor = 0
    s._move(SessionState.POST_TEST)
    begin_phase(m, Phase.POST_TEST, s.concept_id)
    return [_question_prompt(g, plan, 0)]


def _finish_posttest(s: Session, m: LearnerModel, g: CourseGraph,
                     cfg: EngineConfig) -> list[Prompt]:
    outcome = finalize_phase(m, s.concept_id)
    s.last_level = outcome.level
    concept = g.concept(s.concept_id)
    available = {v.method for v in concept.variants}
    decision = decide_after_posttest(
        outcome, s.attempt, available, used_methods=s.used_methods,
        max_repeats=cfg.max_repeats, pass_level=cfg.pass_level,
    )
    prompts: list[Prompt] = [PhaseResult(Phase.POST_TEST, outcome.score, outcome.level)]

    if isinstance(decision, Repeat):
        # make sure a fresh plan will exist before committing to another pass
        try:
            _posttest_plan(s, m, g, cfg, s.attempt + 1)
        except InsufficientQuestions:
            decision = Defer()

    if isinstance(decision, Complete):
        s._emit(EventKind.PHASE_FINALIZED, _phase_payload(s, outcome, "complete"))
        _close(s, m, ConceptStatus.COMPLETED, SessionState.COMPLETED)
        prompts.append(SessionResult(ConceptStatus.COMPLETED, outcome.level))
        return prompts

    if isinstance(decision, Repeat):
        s.attempt += 1
        record = m.concept_records.setdefault(s.concept_id, ConceptRecord())
        record.attempts = s.attempt
        variant = _pick_variant(concept, m, cfg, exclude=s.used_methods)
        s._emit(EventKind.PHASE_FINALIZED, _phase_payload(
            s, outcome, "repeat", {"next_method": variant.method.value}))
        s.current_plan = None
        s.plan_cursor = 0
        prompts.append(_enter_learning(s, m, g, cfg))
        return prompts

    s._emit(EventKind.PHASE_FINALIZED, _phase_payload(s, outcome, "defer"))
    _close(s, m, ConceptStatus.DEFERRED, SessionState.DEFERRED, reason="max-repeats")
    prompts.append(SessionResult(ConceptStatus.DEFERRED, outcome.level))
    return prompts


# -- serialization ----------------------------------------------------------------

def session_to_dict(s: Session) -> dict:
    """Snapshot shape of a session; the transcript is not included (its events
    are persisted separately) and is restored empty."""
    return {
        "session_id": s.session_id,
        "learner_id": s.learner_id,
        "concept_id": s.concept_id,
        "seed": s.seed,
        "state": s.state.value,
        "attempt": s.attempt,
        "plan": None if s.current_plan is None else {
            "phase": s.current_plan.phase.value,
            "concept_id": s.current_plan.concept_id,
            "items": list(s.current_plan.items),
            "seed": s.current_plan.seed,
        },
        "plan_cursor": s.plan_cursor,
        "variant_index": None if s.current_variant is None else s.current_variant.index,
        "content_cursor": s.content_cursor,
        "used_methods": sorted(meth.value for meth in s.used_methods),
        "last_level": s.last_level.value if s.last_level else None,
    }


def session_from_dict(d: dict, g: CourseGraph) -> Session:
    s = Session(
        session_id=d["session_id"],
        learner_id=d["learner_id"],
        concept_id=d["concept_id"],
        seed=d["seed"],
    )
    s.state = SessionState(d["state"])
    s.attempt = d["attempt"]
    raw_plan = d.get("plan")
    if raw_plan is not None:
        s.current_plan = TestPlan(
            phase=Phase(raw_plan["phase"]),
            concept_id=raw_plan["concept_id"],
            items=tuple(raw_plan["items"]),
            seed=raw_plan["seed"],
        )
    s.plan_cursor = d.get("plan_cursor", 0)
    variant_index = d.get("variant_index")
    if variant_index is not None:
        s.current_variant = g.variants[variant_index]
    s.content_cursor = d.get("content_cursor", 0)
    s.used_methods = {Method(v) for v in d.get("used_methods", [])}
    raw_level = d.get("last_level")
    if raw_level:
        s.last_level = KnowledgeLevel(raw_level)
    return s
