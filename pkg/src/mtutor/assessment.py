"""Question bank, rule-based test planning, and grading.

Planning enforces the selection rules: never repeat a question a learner has
seen, spread questions uniformly over a concept's sections (extra slots go to
the most important sections), and draw difficulties from the learner-level
band, touching every available difficulty in the band before repeating one.
The seed only breaks ties between equally eligible questions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Mapping, Sequence

from .errors import InsufficientQuestions, LengthMismatch, OutOfRange
from .learner import (
    KnowledgeLevel,
    LearnerLevel,
    LearnerModel,
    classify_knowledge,
    score_percent,
)
from .seeds import derive_seed

if TYPE_CHECKING:
    from .kb import Concept


class Scope(Enum):
    CONCEPTUAL = "conceptual"
    OBJECTIVE = "objective"


class Phase(Enum):
    PRE_TEST = "pre_test"
    POST_TEST = "post_test"

    @property
    def label(self) -> str:
        return "Pre-test" if self is Phase.PRE_TEST else "Post-test"


@dataclass(frozen=True)
class Question:
    id: str
    concept_id: str
    section_id: str
    difficulty: int
    points: int
    scope: Scope
    prompt: str
    choices: tuple[str, ...]
    correct: int


class QuestionBank:
    """Immutable question collection with id, (section, difficulty) cell, and
    concept indexes."""

    def __init__(self, questions: Sequence[Question]):
        self.questions: tuple[Question, ...] = tuple(questions)
        self._by_id: dict[str, Question] = {}
        self._by_cell: dict[tuple[str, int], list[Question]] = {}
        self._by_concept: dict[str, list[Question]] = {}
        for q in self.questions:
            self._by_id.setdefault(q.id, q)
            self._by_cell.setdefault((q.section_id, q.difficulty), []).append(q)
            self._by_concept.setdefault(q.concept_id, []).append(q)

    def __len__(self) -> int:
        return len(self.questions)

    def question(self, question_id: str) -> Question | None:
        return self._by_id.get(question_id)

    def by_cell(self, section_id: str, difficulty: int) -> tuple[Question, ...]:
        return tuple(self._by_cell.get((section_id, difficulty), ()))

    def for_concept(self, concept_id: str) -> tuple[Question, ...]:
        return tuple(self._by_concept.get(concept_id, ()))


@dataclass(frozen=True)
class TestPlan:
    phase: Phase
    concept_id: str
    items: tuple[str, ...]
    seed: int


@dataclass(frozen=True)
class AssessmentOutcome:
    phase: Phase
    score: int
    level: KnowledgeLevel
    conceptual_level: KnowledgeLevel
    objective_level: KnowledgeLevel
    per_section: dict[str, tuple[int, int]]
    answers: tuple[tuple[str, int | None, bool], ...]


DEFAULT_DIFFICULTY_BANDS: dict[LearnerLevel, frozenset[int]] = {
    LearnerLevel.WEAK: frozenset({1, 2}),
    LearnerLevel.SLOW_LEARNER: frozenset({2, 3}),
    LearnerLevel.SMART: frozenset({3, 4}),
    LearnerLevel.GENIUS: frozenset({4, 5}),
}


def difficulty_band(
    level: LearnerLevel,
    table: Mapping[LearnerLevel, frozenset[int]] | None = None,
) -> frozenset[int]:
    """Difficulty values appropriate for a learner level."""
    return (table or DEFAULT_DIFFICULTY_BANDS)[level]


def default_count(section_count: int) -> int:
    """Default questions per test: twice the section count, kept within
    [section count, 10] so a phase stays answerable on a small screen."""
    return max(section_count, min(2 * section_count, 10))


def _section_counts(concept: "Concept", count: int) -> dict[str, int]:
    """Allot ``count`` slots over sections: uniform base, the remainder going
    to sections in descending importance (ties by section order)."""
    sections = concept.sections
    base, extra = divmod(count, len(sections))
    ranked = sorted(
        range(len(sections)),
        key=lambda i: (-sections[i].importance_weight, i),
    )
    counts = {s.id: base for s in sections}
    for i in ranked[:extra]:
        counts[sections[i].id] += 1
    return counts


def plan_test(
    bank: QuestionBank,
    concept: "Concept",
    m: LearnerModel,
    phase: Phase,
    count: int,
    seed: int,
    band_table: Mapping[LearnerLevel, frozenset[int]] | None = None,
    fallback_level: LearnerLevel = LearnerLevel.SLOW_LEARNER,
) -> TestPlan:
    """Select and order questions for one test phase.

    Deterministic in all inputs; the seed shuffles each (section, difficulty)
    eligibility list before selection and can therefore only change which of
    several equally eligible questions are taken, never how many or from where.
    Raises InsufficientQuestions when some section's unused in-band supply is
    smaller than its allotment (there is no silent fallback to other
    difficulties).
    """
    if count < len(concept.sections):
        raise OutOfRange(
            f"count {count} below section count {len(concept.sections)}",
            count=count, sections=len(concept.sections),
        )
    level = m.learner_level if m.learner_level is not None else fallback_level
    band = sorted(difficulty_band(level, band_table))
    counts = _section_counts(concept, count)

    per_section: dict[str, list[Question]] = {}
    for section in concept.sections:
        pools: dict[int, list[Question]] = {}
        for difficulty in band:
            pool = [
                q for q in bank.by_cell(section.id, difficulty)
                if q.concept_id == concept.id and q.id not in m.asked_questions
            ]
            rng = random.Random(derive_seed(seed, phase.value, concept.id, section.id, difficulty))
            rng.shuffle(pool)
            pools[difficulty] = pool
        needed = counts[section.id]
        available = sum(len(p) for p in pools.values())
        if available < needed:
            raise InsufficientQuestions(section.id, band, needed, available)
        chosen: list[Question] = []
        while len(chosen) < needed:
            took_any = False
            for difficulty in band:
                if len(chosen) >= needed:
                    break
                if pools[difficulty]:
                    chosen.append(pools[difficulty].pop(0))
                    took_any = True
            if not took_any:  # unreachable given the availability check
                raise InsufficientQuestions(section.id, band, needed, len(chosen))
        chosen.sort(key=lambda q: q.difficulty)  # stable: keeps pick order within a difficulty
        per_section[section.id] = chosen

    items: list[str] = []
    cursor = 0
    while len(items) < count:
        progressed = False
        for section in concept.sections:
            queue = per_section[section.id]
            if cursor < len(queue):
                items.append(queue[cursor].id)
                progressed = True
        if not progressed:
            break
        cursor += 1
    return TestPlan(phase=phase, concept_id=concept.id, items=tuple(items), seed=seed)


def grade(plan: TestPlan, bank: QuestionBank, answers: Sequence[int]) -> AssessmentOutcome:
    """Grade a completed plan against chosen answer indexes. An index outside a
    question's choices counts as wrong (the channel rejects those earlier)."""
    if len(answers) != len(plan.items):
        raise LengthMismatch(
            f"{len(answers)} answers for {len(plan.items)} questions",
            expected=len(plan.items), got=len(answers),
        )
    earned = 0
    total = 0
    by_scope: dict[Scope, list[int]] = {}
    per_section: dict[str, list[int]] = {}
    graded: list[tuple[str, int | None, bool]] = []
    for qid, chosen in zip(plan.items, answers):
        q = bank.question(qid)
        if q is None:
            raise LengthMismatch(f"plan names unknown question {qid!r}")
        ok = chosen == q.correct
        gained = q.points if ok else 0
        earned += gained
        total += q.points
        scope_cell = by_scope.setdefault(q.scope, [0, 0])
        scope_cell[0] += gained
        scope_cell[1] += q.points
        section_cell = per_section.setdefault(q.section_id, [0, 0])
        section_cell[0] += gained
        section_cell[1] += q.points
        graded.append((qid, chosen, ok))

    score = score_percent(earned, total)
    level = classify_knowledge(score)

    def sub_level(scope: Scope) -> KnowledgeLevel:
        e, mx = by_scope.get(scope, (0, 0))
        if mx == 0:
            return level
        return classify_knowledge(score_percent(e, mx))

    return AssessmentOutcome(
        phase=plan.phase,
        score=score,
        level=level,
        conceptual_level=sub_level(Scope.CONCEPTUAL),
        objective_level=sub_level(Scope.OBJECTIVE),
        per_section={sid: (e, mx) for sid, (e, mx) in per_section.items()},
        answers=tuple(graded),
    )
