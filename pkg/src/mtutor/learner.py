"""Learner modeling: style profiling, knowledge-level bands, learner-level
derivation, and the running tally updated on every answer.

A learner's knowledge about a concept is scored 0-100 and bucketed into five
bands; the coarse learner level (weak / slow learner / smart / genius) drives
which question difficulties they are served.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import (
    AlreadyAnswered,
    DuplicateAnswer,
    EmptyPhase,
    NoActivePhase,
    OutOfRange,
    ParseError,
    UnknownItem,
    UnknownOption,
)

if TYPE_CHECKING:  # avoid an import cycle; assessment imports this module
    from .assessment import AssessmentOutcome, Phase, Question


class LearningStyle(Enum):
    """The five style codes. Declaration order is the canonical tie-break order."""

    SS = "SS"    # sensation seeking
    GOA = "GOA"  # goal oriented achiever
    EIA = "EIA"  # emotionally intelligent achiever
    CA = "CA"    # conscientious achiever
    DLA = "DLA"  # deep learning achiever


STYLE_ORDER: tuple[LearningStyle, ...] = tuple(LearningStyle)


class KnowledgeLevel(Enum):
    WEAK = "weak"
    AVERAGE = "average"
    GOOD = "good"
    VERY_GOOD = "very_good"
    EXCELLENT = "excellent"

    @property
    def rank(self) -> int:
        return _KNOWLEDGE_ORDER.index(self)

    @property
    def label(self) -> str:
        return _KNOWLEDGE_LABELS[self]

    def __lt__(self, other):
        if not isinstance(other, KnowledgeLevel):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other):
        if not isinstance(other, KnowledgeLevel):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other):
        if not isinstance(other, KnowledgeLevel):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other):
        if not isinstance(other, KnowledgeLevel):
            return NotImplemented
        return self.rank >= other.rank


_KNOWLEDGE_ORDER = (
    KnowledgeLevel.WEAK,
    KnowledgeLevel.AVERAGE,
    KnowledgeLevel.GOOD,
    KnowledgeLevel.VERY_GOOD,
    KnowledgeLevel.EXCELLENT,
)

_KNOWLEDGE_LABELS = {
    KnowledgeLevel.WEAK: "Weak",
    KnowledgeLevel.AVERAGE: "Average",
    KnowledgeLevel.GOOD: "Good",
    KnowledgeLevel.VERY_GOOD: "Very good",
    KnowledgeLevel.EXCELLENT: "Excellent",
}

# Inclusive score bands, highest first. 0-30 is the fifth band completing the
# partition of 0-100.
KNOWLEDGE_BANDS: tuple[tuple[int, int, KnowledgeLevel], ...] = (
    (86, 100, KnowledgeLevel.EXCELLENT),
    (71, 85, KnowledgeLevel.VERY_GOOD),
    (51, 70, KnowledgeLevel.GOOD),
    (31, 50, KnowledgeLevel.AVERAGE),
    (0, 30, KnowledgeLevel.WEAK),
)


class LearnerLevel(Enum):
    WEAK = "weak"
    SLOW_LEARNER = "slow_learner"
    SMART = "smart"
    GENIUS = "genius"

    @property
    def rank(self) -> int:
        return _LEARNER_ORDER.index(self)

    @property
    def label(self) -> str:
        return _LEARNER_LABELS[self]

    def __lt__(self, other):
        if not isinstance(other, LearnerLevel):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other):
        if not isinstance(other, LearnerLevel):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other):
        if not isinstance(other, LearnerLevel):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other):
        if not isinstance(other, LearnerLevel):
            return NotImplemented
        return self.rank >= other.rank


_LEARNER_ORDER = (
    LearnerLevel.WEAK,
    LearnerLevel.SLOW_LEARNER,
    LearnerLevel.SMART,
    LearnerLevel.GENIUS,
)

_LEARNER_LABELS = {
    LearnerLevel.WEAK: "weak",
    LearnerLevel.SLOW_LEARNER: "slow learner",
    LearnerLevel.SMART: "smart",
    LearnerLevel.GENIUS: "genius",
}


class ConceptStatus(Enum):
    NOT_STARTED = "not_started"
    IN_PROGRESS = "in_progress"
    COMPLETED = "completed"
    SKIPPED = "skipped"
    DEFERRED = "deferred"


@dataclass
class StyleProfile:
    """Normalized style weights plus the dominant style (argmax, ties broken by
    canonical style order)."""

    weights: dict[LearningStyle, float]
    dominant: LearningStyle

    @classmethod
    def uniform(cls) -> "StyleProfile":
        return cls({s: 1.0 / len(STYLE_ORDER) for s in STYLE_ORDER}, LearningStyle.SS)

    def to_dict(self) -> dict:
        return {
            "weights": {s.value: self.weights.get(s, 0.0) for s in STYLE_ORDER},
            "dominant": self.dominant.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StyleProfile":
        return cls(
            weights={s: float(d["weights"].get(s.value, 0.0)) for s in STYLE_ORDER},
            dominant=LearningStyle(d["dominant"]),
        )


@dataclass
class ConceptRecord:
    conceptual_level: KnowledgeLevel | None = None
    objective_level: KnowledgeLevel | None = None
    attempts: int = 0
    status: ConceptStatus = ConceptStatus.NOT_STARTED


@dataclass
class PhaseTally:
    """Running score tally for the test phase in progress."""

    phase: "Phase"
    concept_id: str
    earned: int = 0
    maximum: int = 0
    by_scope: dict = field(default_factory=dict)    # Scope -> [earned, max]
    by_section: dict = field(default_factory=dict)  # section id -> [earned, max]
    answers: list = field(default_factory=list)     # (question id, chosen, correct)
    answered_ids: set = field(default_factory=set)


@dataclass
class LearnerModel:
    """Everything the engine knows about one learner.

    ``learner_level`` is None until the first pre-test has been folded in;
    planning falls back to the configured starting level until then.
    """

    learner_id: str
    style_profile: StyleProfile = field(default_factory=StyleProfile.uniform)
    learner_level: LearnerLevel | None = None
    concept_records: dict[str, ConceptRecord] = field(default_factory=dict)
    asked_questions: set[str] = field(default_factory=set)
    running: PhaseTally | None = None


# -- profiler questionnaire ----------------------------------------------------

@dataclass
class ProfilerOption:
    id: str
    label: str
    increments: dict[LearningStyle, int]


@dataclass
class ProfilerItem:
    id: str
    prompt: str
    options: list[ProfilerOption]

    def option(self, option_id: str) -> ProfilerOption | None:
        for opt in self.options:
            if opt.id == option_id:
                return opt
        return None


@dataclass
class Questionnaire:
    items: list[ProfilerItem]

    def item(self, item_id: str) -> ProfilerItem | None:
        for it in self.items:
            if it.id == item_id:
                return it
        return None


def load_questionnaire(data: bytes | str) -> Questionnaire:
    """Parse a profiler questionnaire file (JSON: items with options carrying
    per-style integer increments)."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno)
    if not isinstance(doc, dict) or "items" not in doc:
        raise ParseError("questionnaire must be an object with an 'items' list")
    items: list[ProfilerItem] = []
    seen_items: set[str] = set()
    for raw in doc["items"]:
        if not isinstance(raw, dict):
            raise ParseError("questionnaire item must be an object")
        for key in ("id", "prompt", "options"):
            if key not in raw:
                raise ParseError(f"questionnaire item missing '{key}'")
        if raw["id"] in seen_items:
            raise ParseError(f"duplicate questionnaire item id {raw['id']!r}")
        seen_items.add(raw["id"])
        options: list[ProfilerOption] = []
        seen_opts: set[str] = set()
        for rawopt in raw["options"]:
            for key in ("id", "label", "increments"):
                if key not in rawopt:
                    raise ParseError(f"option in item {raw['id']!r} missing '{key}'")
            if rawopt["id"] in seen_opts:
                raise ParseError(f"duplicate option id {rawopt['id']!r} in item {raw['id']!r}")
            seen_opts.add(rawopt["id"])
            increments: dict[LearningStyle, int] = {}
            for style_key, inc in rawopt["increments"].items():
                try:
                    style = LearningStyle(style_key)
                except ValueError:
                    raise ParseError(f"unknown style {style_key!r} in item {raw['id']!r}")
                if not isinstance(inc, int) or isinstance(inc, bool) or inc < 0:
                    raise ParseError(f"increment for {style_key} must be a non-negative integer")
                increments[style] = inc
            options.append(ProfilerOption(id=rawopt["id"], label=rawopt["label"], increments=increments))
        if not options:
            raise ParseError(f"item {raw['id']!r} has no options")
        items.append(ProfilerItem(id=raw["id"], prompt=raw["prompt"], options=options))
    if not items:
        raise ParseError("questionnaire has no items")
    return Questionnaire(items=items)


# -- operations ----------------------------------------------------------------

def profile_styles(
    answers: Iterable[tuple[str, str]], questionnaire: Questionnaire
) -> StyleProfile:
    """Score questionnaire answers into a normalized style profile.

    With no answers (or all-zero increments) the profile is uniform and the
    dominant style is the canonical first (SS).
    """
    tally = {s: 0 for s in STYLE_ORDER}
    seen: set[str] = set()
    for item_id, option_id in answers:
        item = questionnaire.item(item_id)
        if item is None:
            raise UnknownItem(f"unknown questionnaire item {item_id!r}", item=item_id)
        if item_id in seen:
            raise DuplicateAnswer(f"item {item_id!r} answered twice", item=item_id)
        seen.add(item_id)
        option = item.option(option_id)
        if option is None:
            raise UnknownOption(
                f"unknown option {option_id!r} for item {item_id!r}",
                item=item_id, option=option_id,
            )
        for style, inc in option.increments.items():
            tally[style] += inc
    total = sum(tally.values())
    if total == 0:
        return StyleProfile.uniform()
    weights = {s: tally[s] / total for s in STYLE_ORDER}
    dominant = max(STYLE_ORDER, key=lambda s: tally[s])  # max keeps first on ties
    return StyleProfile(weights=weights, dominant=dominant)


def classify_knowledge(score: int) -> KnowledgeLevel:
    """Bucket an integer score 0-100 into its knowledge band."""
    if isinstance(score, bool) or not isinstance(score, int):
        raise OutOfRange(f"score must be an integer, got {score!r}")
    if not 0 <= score <= 100:
        raise OutOfRange(f"score {score} outside 0-100", score=score)
    for lo, hi, level in KNOWLEDGE_BANDS:
        if lo <= score <= hi:
            return level
    raise AssertionError("bands partition 0-100")


_PRETEST_TO_LEVEL = {
    KnowledgeLevel.EXCELLENT: LearnerLevel.GENIUS,
    KnowledgeLevel.VERY_GOOD: LearnerLevel.SMART,
    KnowledgeLevel.GOOD: LearnerLevel.SMART,
    KnowledgeLevel.AVERAGE: LearnerLevel.SLOW_LEARNER,
    KnowledgeLevel.WEAK: LearnerLevel.WEAK,
}


def derive_learner_level(
    pretest: KnowledgeLevel, prior: LearnerLevel | None = None
) -> LearnerLevel:
    """Map a pre-test band to a learner level; with a prior, move at most one
    step toward the mapped target (smoothed update)."""
    target = _PRETEST_TO_LEVEL[pretest]
    if prior is None:
        return target
    step = max(-1, min(1, target.rank - prior.rank))
    return _LEARNER_ORDER[prior.rank + step]


def score_percent(earned: int, maximum: int) -> int:
    """Integer percentage of ``earned``/``maximum``, rounding halves up."""
    if maximum <= 0:
        raise EmptyPhase("cannot score an empty tally")
    return (200 * earned + maximum) // (2 * maximum)


def begin_phase(model: LearnerModel, phase: "Phase", concept_id: str) -> None:
    """Open a fresh running tally for a test phase."""
    if model.running is not None:
        raise ValueError("a phase tally is already open")
    model.running = PhaseTally(phase=phase, concept_id=concept_id)


def update_on_answer(
    model: LearnerModel, q: "Question", correct: bool, chosen: int | None = None
) -> LearnerModel:
    """Fold one answered question into the running tally and the lifetime
    asked-question set."""
    tally = model.running
    if tally is None:
        raise NoActivePhase("no test phase in progress")
    if q.id in tally.answered_ids:
        raise AlreadyAnswered(f"question {q.id!r} already answered this phase", question=q.id)
    tally.answered_ids.add(q.id)
    model.asked_questions.add(q.id)
    gained = q.points if correct else 0
    tally.earned += gained
    tally.maximum += q.points
    scope_cell = tally.by_scope.setdefault(q.scope, [0, 0])
    scope_cell[0] += gained
    scope_cell[1] += q.points
    section_cell = tally.by_section.setdefault(q.section_id, [0, 0])
    section_cell[0] += gained
    section_cell[1] += q.points
    tally.answers.append((q.id, chosen, correct))
    return model


def finalize_phase(model: LearnerModel, concept_id: str) -> "AssessmentOutcome":
    """Close the running tally: compute the overall score and band, the
    per-scope sub-bands (a scope with no questions inherits the overall band),
    record them on the concept, and clear the tally."""
    from .assessment import AssessmentOutcome, Scope

    tally = model.running
    if tally is None:
        raise NoActivePhase("no test phase in progress")
    if tally.concept_id != concept_id:
        raise ValueError(f"tally is for concept {tally.concept_id!r}, not {concept_id!r}")
    if tally.maximum <= 0:
        raise EmptyPhase("phase closed with no answered questions")

    score = score_percent(tally.earned, tally.maximum)
    level = classify_knowledge(score)

    def sub_level(scope: Scope) -> KnowledgeLevel:
        earned, maximum = tally.by_scope.get(scope, (0, 0))
        if maximum == 0:
            return level
        return classify_knowledge(score_percent(earned, maximum))

    record = model.concept_records.setdefault(concept_id, ConceptRecord())
    record.conceptual_level = sub_level(Scope.CONCEPTUAL)
    record.objective_level = sub_level(Scope.OBJECTIVE)
    outcome = AssessmentOutcome(
        phase=tally.phase,
        score=score,
        level=level,
        conceptual_level=record.conceptual_level,
        objective_level=record.objective_level,
        per_section={sid: (e, m) for sid, (e, m) in tally.by_section.items()},
        answers=tuple(tally.answers),
    )
    model.running = None
    return outcome


# -- serialization ---------------------------------------------------------------

def model_to_dict(model: LearnerModel) -> dict:
    tally = model.running
    return {
        "learner_id": model.learner_id,
        "style_profile": model.style_profile.to_dict(),
        "learner_level": model.learner_level.value if model.learner_level else None,
        "concept_records": {
            cid: {
                "conceptual_level": r.conceptual_level.value if r.conceptual_level else None,
                "objective_level": r.objective_level.value if r.objective_level else None,
                "attempts": r.attempts,
                "status": r.status.value,
            }
            for cid, r in sorted(model.concept_records.items())
        },
        "asked_questions": sorted(model.asked_questions),
        "running": None if tally is None else {
            "phase": tally.phase.value,
            "concept_id": tally.concept_id,
            "earned": tally.earned,
            "maximum": tally.maximum,
            "by_scope": {scope.value: list(cell) for scope, cell in sorted(
                tally.by_scope.items(), key=lambda kv: kv[0].value)},
            "by_section": {sid: list(cell) for sid, cell in sorted(tally.by_section.items())},
            "answers": [list(a) for a in tally.answers],
        },
    }


def model_from_dict(d: dict) -> LearnerModel:
    from .assessment import Phase, Scope

    model = LearnerModel(
        learner_id=d["learner_id"],
        style_profile=StyleProfile.from_dict(d["style_profile"]),
        learner_level=LearnerLevel(d["learner_level"]) if d.get("learner_level") else None,
    )
    for cid, raw in d.get("concept_records", {}).items():
        model.concept_records[cid] = ConceptRecord(
            conceptual_level=KnowledgeLevel(raw["conceptual_level"]) if raw.get("conceptual_level") else None,
            objective_level=KnowledgeLevel(raw["objective_level"]) if raw.get("objective_level") else None,
            attempts=raw.get("attempts", 0),
            status=ConceptStatus(raw.get("status", "not_started")),
        )
    model.asked_questions = set(d.get("asked_questions", []))
    raw_tally = d.get("running")
    if raw_tally is not None:
        tally = PhaseTally(phase=Phase(raw_tally["phase"]), concept_id=raw_tally["concept_id"])
        tally.earned = raw_tally["earned"]
        tally.maximum = raw_tally["maximum"]
        tally.by_scope = {Scope(k): list(v) for k, v in raw_tally.get("by_scope", {}).items()}
        tally.by_section = {k: list(v) for k, v in raw_tally.get("by_section", {}).items()}
        tally.answers = [tuple(a) for a in raw_tally.get("answers", [])]
        tally.answered_ids = {a[0] for a in tally.answers}
        model.running = tally
    return model
