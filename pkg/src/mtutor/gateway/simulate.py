"""Simulated learner cohorts.

A simulated learner answers questions by a logistic response model over
ability and question difficulty, with an optional bonus when the content was
delivered through their single most preferred method. The same (points,
p_correct) pairs feed an exact dynamic-programming score distribution, which
is the oracle the simulation is checked against.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from ..assessment import Phase, Question, TestPlan, plan_test
from ..config import EngineConfig
from ..kb import DEFAULT_STYLE_METHOD_MATRIX, CourseGraph, Method
from ..learner import (
    KNOWLEDGE_BANDS,
    ConceptRecord,
    ConceptStatus,
    KnowledgeLevel,
    LearnerModel,
    LearningStyle,
    STYLE_ORDER,
    StyleProfile,
    score_percent,
)
from ..seeds import derive_seed
from ..session import (
    ContentPage,
    PhaseResult,
    QuestionPrompt,
    SessionState,
    TERMINAL_STATES,
    eligible_concepts,
    start_session,
    submit,
)


def logistic(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def level_floor(level: KnowledgeLevel) -> int:
    """Lowest score that classifies into ``level``."""
    return min(lo for lo, _, lv in KNOWLEDGE_BANDS if lv is level)


@dataclass
class SimulatedLearner:
    """Logistic response model: p = floor + (1 - floor) * logistic(ability +
    bonus - (difficulty - 3)), floor being the guessing chance. The bonus
    applies only when the delivered method is the style's first preference."""

    style: LearningStyle
    ability: float | dict[str, float] = 0.0
    match_bonus: float = 0.0
    rng: random.Random = dc_field(default_factory=random.Random)
    matrix: Mapping[LearningStyle, Sequence[Method]] | None = None

    def ability_for(self, section_id: str) -> float:
        if isinstance(self.ability, dict):
            return self.ability.get(section_id, 0.0)
        return self.ability

    @property
    def preferred_method(self) -> Method:
        table = self.matrix if self.matrix is not None else DEFAULT_STYLE_METHOD_MATRIX
        return table[self.style][0]

    def p_correct(self, q: Question, delivered: Method | None) -> float:
        floor = 1.0 / len(q.choices)
        bonus = self.match_bonus if delivered is self.preferred_method and delivered is not None else 0.0
        return floor + (1.0 - floor) * logistic(
            self.ability_for(q.section_id) + bonus - (q.difficulty - 3))

    def answer(self, q: Question, delivered: Method | None) -> int:
        if self.rng.random() < self.p_correct(q, delivered):
            return q.correct
        wrong = [i for i in range(len(q.choices)) if i != q.correct]
        return self.rng.choice(wrong)


# -- exact score oracle -----------------------------------------------------------

def score_distribution(items: Sequence[tuple[int, float]]) -> dict[int, float]:
    """Exact distribution of the graded 0-100 score for independent questions
    given their (points, p_correct) pairs."""
    total = sum(points for points, _ in items)
    dist: dict[int, float] = {0: 1.0}
    for points, p in items:
        nxt: dict[int, float] = {}
        for earned, prob in dist.items():
            nxt[earned + points] = nxt.get(earned + points, 0.0) + prob * p
            nxt[earned] = nxt.get(earned, 0.0) + prob * (1.0 - p)
        dist = nxt
    out: dict[int, float] = {}
    for earned, prob in dist.items():
        s = score_percent(earned, total)
        out[s] = out.get(s, 0.0) + prob
    return out


def expected_score(dist: Mapping[int, float]) -> float:
    return sum(s * p for s, p in dist.items())


def prob_at_least(dist: Mapping[int, float], threshold: int) -> float:
    return sum(p for s, p in dist.items() if s >= threshold)


def plan_response_items(
    course: CourseGraph, plan: TestPlan, sim: SimulatedLearner,
    delivered: Method | None,
) -> list[tuple[int, float]]:
    out = []
    for qid in plan.items:
        q = course.bank.question(qid)
        out.append((q.points, sim.p_correct(q, delivered)))
    return out


def pretest_skip_probability(
    course: CourseGraph, cfg: EngineConfig, model: LearnerModel,
    sim: SimulatedLearner, concept_id: str, seed: int,
) -> float:
    """Analytic probability that the pre-test alone masters the concept."""
    concept = course.concept(concept_id)
    plan = plan_test(
        course.bank, concept, model, Phase.PRE_TEST,
        cfg.count_for(True, len(concept.sections)), derive_seed(seed, "pre"),
        band_table=cfg.difficulty_bands, fallback_level=cfg.initial_learner_level)
    dist = score_distribution(plan_response_items(course, plan, sim, None))
    return prob_at_least(dist, level_floor(cfg.skip_level))


# -- cohorts ---------------------------------------------------------------------

@dataclass
class CohortSpec:
    n: int
    seed: int
    ability_mean: float = 0.0
    ability_sd: float = 1.0
    match_bonus: float = 0.0
    style_match: bool = True  # False: force each learner's least preferred method
    max_sessions: int = 50


@dataclass
class SessionTrace:
    concept_id: str
    status: str
    attempts: int
    pre_score: int | None
    post_scores: list[int]


@dataclass
class LearnerTrace:
    learner_id: str
    style: str
    ability: float
    sessions: list[SessionTrace]


@dataclass
class CohortReport:
    spec: CohortSpec
    learners: list[LearnerTrace]
    sessions_total: int
    completed: int
    skipped: int
    deferred: int
    completion_rate: float
    skip_rate: float
    mean_attempts: float
    mean_post_score: float | None

    def to_dict(self) -> dict:
        return {
            "spec": {
                "n": self.spec.n, "seed": self.spec.seed,
                "ability_mean": self.spec.ability_mean,
                "ability_sd": self.spec.ability_sd,
                "match_bonus": self.spec.match_bonus,
                "style_match": self.spec.style_match,
            },
            "sessions_total": self.sessions_total,
            "completed": self.completed,
            "skipped": self.skipped,
            "deferred": self.deferred,
            "completion_rate": self.completion_rate,
            "skip_rate": self.skip_rate,
            "mean_attempts": self.mean_attempts,
            "mean_post_score": self.mean_post_score,
            "learners": [
                {
                    "learner_id": lt.learner_id,
                    "style": lt.style,
                    "ability": lt.ability,
                    "sessions": [
                        {
                            "concept_id": st.concept_id,
                            "status": st.status,
                            "attempts": st.attempts,
                            "pre_score": st.pre_score,
                            "post_scores": st.post_scores,
                        }
                        for st in lt.sessions
                    ],
                }
                for lt in self.learners
            ],
        }


def _run_session(
    course: CourseGraph, cfg: EngineConfig, model: LearnerModel,
    sim: SimulatedLearner, concept_id: str, seed: int, session_id: str,
) -> SessionTrace:
    s, first = start_session(course, model, concept_id, seed, cfg, session_id=session_id)
    results: list[PhaseResult] = []
    prompts: list = [first]
    while True:
        results.extend(p for p in prompts if isinstance(p, PhaseResult))
        if s.state in TERMINAL_STATES:
            break
        head = prompts[-1]
        if isinstance(head, QuestionPrompt):
            q = course.bank.question(head.question_id)
            delivered = (s.current_variant.method
                         if s.state is SessionState.POST_TEST and s.current_variant is not None
                         else None)
            s, model, prompts = submit(s, model, course, sim.answer(q, delivered), cfg)
        elif isinstance(head, ContentPage):
            s, model, prompts = submit(s, model, course, "next", cfg)
        else:
            raise AssertionError(f"active session ended on {head!r}")
    pre = next((r.score for r in results if r.phase is Phase.PRE_TEST), None)
    posts = [r.score for r in results if r.phase is Phase.POST_TEST]
    return SessionTrace(
        concept_id=concept_id, status=s.state.value, attempts=s.attempt,
        pre_score=pre, post_scores=posts,
    )


def _run_learner(
    course: CourseGraph, cfg: EngineConfig, spec: CohortSpec, index: int,
) -> LearnerTrace:
    lseed = derive_seed(spec.seed, "learner", index)
    rng = random.Random(lseed)
    ability = max(-3.0, min(3.0, rng.gauss(spec.ability_mean, spec.ability_sd)))
    style = STYLE_ORDER[index % len(STYLE_ORDER)]
    learner_id = f"sim{index:05d}"

    model = LearnerModel(learner_id=learner_id)
    model.style_profile = StyleProfile(
        weights={s: (1.0 if s is style else 0.0) for s in STYLE_ORDER},
        dominant=style,
    )
    lcfg = cfg.copy()
    if not spec.style_match:
        lcfg.forced_method = lcfg.style_method_matrix[style][-1]
    sim = SimulatedLearner(
        style=style, ability=ability, match_bonus=spec.match_bonus,
        rng=random.Random(derive_seed(lseed, "answers")),
        matrix=lcfg.style_method_matrix,
    )

    traces: list[SessionTrace] = []
    k = 0
    while k < spec.max_sessions:
        queue = eligible_concepts(course, model)
        pending = [
            cid for cid in queue
            if model.concept_records.get(cid, ConceptRecord()).status is not ConceptStatus.DEFERRED
        ]
        if not pending:
            break
        k += 1
        traces.append(_run_session(
            course, lcfg, model, sim, pending[0],
            derive_seed(lseed, "session", k), session_id=f"{learner_id}-s{k}"))
    return LearnerTrace(learner_id=learner_id, style=style.value,
                        ability=ability, sessions=traces)


def run_cohort(course: CourseGraph, cfg: EngineConfig, spec: CohortSpec) -> CohortReport:
    """Run a full cohort in memory; deterministic for a given spec."""
    learners = [_run_learner(course, cfg, spec, i) for i in range(spec.n)]
    sessions = [st for lt in learners for st in lt.sessions]
    completed = sum(1 for st in sessions if st.status == "completed")
    skipped = sum(1 for st in sessions if st.status == "skipped")
    deferred = sum(1 for st in sessions if st.status == "deferred")
    non_skipped = [st for st in sessions if st.status != "skipped"]
    post_scores = [score for st in sessions for score in st.post_scores]
    return CohortReport(
        spec=spec,
        learners=learners,
        sessions_total=len(sessions),
        completed=completed,
        skipped=skipped,
        deferred=deferred,
        completion_rate=completed / len(sessions) if sessions else 0.0,
        skip_rate=skipped / len(sessions) if sessions else 0.0,
        mean_attempts=(sum(st.attempts for st in non_skipped) / len(non_skipped)
                       if non_skipped else 0.0),
        mean_post_score=(sum(post_scores) / len(post_scores) if post_scores else None),
    )


def report_to_csv(report: CohortReport) -> str:
    """Per-learner rows; id column first, numeric columns after."""
    lines = ["learner_id,ability,sessions,completed,skipped,deferred,mean_attempts,mean_post_score"]
    for lt in report.learners:
        sessions = lt.sessions
        non_skipped = [st for st in sessions if st.status != "skipped"]
        posts = [s for st in sessions for s in st.post_scores]
        mean_attempts = (sum(st.attempts for st in non_skipped) / len(non_skipped)
                         if non_skipped else 0.0)
        mean_post = sum(posts) / len(posts) if posts else ""
        lines.append(",".join([
            lt.learner_id,
            f"{lt.ability:.4f}",
            str(len(sessions)),
            str(sum(1 for st in sessions if st.status == "completed")),
            str(sum(1 for st in sessions if st.status == "skipped")),
            str(sum(1 for st in sessions if st.status == "deferred")),
            f"{mean_attempts:.4f}",
            f"{mean_post:.2f}" if posts else "",
        ]))
    return "\n".join(lines) + "\n"
