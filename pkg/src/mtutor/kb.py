"""Course knowledge base.

Loads and validates the course file (concepts, sections, content variants,
question bank), schedules which concepts are eligible next, and picks the
content variant that best fits a learner's dominant style and level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .assessment import Question, QuestionBank, Scope
from .channel import is_printable_text
from .errors import ParseError, ValidationError
from .learner import LearnerLevel, LearnerModel, LearningStyle


class Method(Enum):
    """Presentation method of a content variant. Declaration order is the
    canonical order used for neutral tie-breaks."""

    TEXT = "text"
    FILM = "film"
    DYNAMIC_VIEW = "dynamic_view"
    GAME = "game"


METHOD_ORDER: tuple[Method, ...] = tuple(Method)

# Which methods each dominant style prefers, best first. Configuration data;
# deployments can override it wholesale.
DEFAULT_STYLE_METHOD_MATRIX: dict[LearningStyle, tuple[Method, ...]] = {
    LearningStyle.SS: (Method.GAME, Method.DYNAMIC_VIEW, Method.FILM, Method.TEXT),
    LearningStyle.GOA: (Method.DYNAMIC_VIEW, Method.TEXT, Method.FILM, Method.GAME),
    LearningStyle.EIA: (Method.FILM, Method.DYNAMIC_VIEW, Method.TEXT, Method.GAME),
    LearningStyle.CA: (Method.TEXT, Method.DYNAMIC_VIEW, Method.FILM, Method.GAME),
    LearningStyle.DLA: (Method.TEXT, Method.FILM, Method.DYNAMIC_VIEW, Method.GAME),
}


@dataclass(frozen=True)
class Section:
    id: str
    title: str
    importance_weight: int


@dataclass(frozen=True)
class ContentVariant:
    """One rendering of a concept (or of a single section when section_id is
    set). Text bodies are page lists; other methods carry an opaque media
    reference. Empty style_affinity / level_band means unrestricted."""

    concept_id: str
    method: Method
    body: tuple[str, ...] | str
    section_id: str | None = None
    style_affinity: frozenset = frozenset()
    level_band: frozenset = frozenset()
    index: int = 0  # position in the course file, for deterministic tie-breaks

    @property
    def pages(self) -> tuple[str, ...]:
        """Deliverable text pages. Non-text media become a one-page reference
        line so the text channel can still carry them."""
        if self.method is Method.TEXT:
            return tuple(self.body)
        return (f"[media: {self.body}]",)


@dataclass(frozen=True)
class Concept:
    id: str
    title: str
    prerequisites: tuple[str, ...]
    sections: tuple[Section, ...]
    variants: tuple[ContentVariant, ...] = ()  # filled in by load, not file data

    def section(self, section_id: str) -> Section | None:
        for s in self.sections:
            if s.id == section_id:
                return s
        return None

    @property
    def section_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.sections)


@dataclass(frozen=True)
class CourseGraph:
    version: int
    concepts: tuple[Concept, ...]
    variants: tuple[ContentVariant, ...]
    bank: QuestionBank

    def concept(self, concept_id: str) -> Concept | None:
        for c in self.concepts:
            if c.id == concept_id:
                return c
        return None

    @property
    def concept_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.concepts)


@dataclass(frozen=True)
class Violation:
    rule: str
    entity: str
    message: str


# -- parsing -------------------------------------------------------------------

def _require_keys(obj: dict, required: Iterable[str], allowed: Iterable[str], where: str) -> None:
    allowed_set = set(allowed)
    for key in obj:
        if key not in allowed_set:
            raise ParseError(f"unknown key {key!r} in {where}")
    for key in required:
        if key not in obj:
            raise ParseError(f"{where} missing required key {key!r}")


def _expect(value, kind, where: str):
    if kind is int and isinstance(value, bool):
        raise ParseError(f"{where} must be an integer")
    if not isinstance(value, kind):
        raise ParseError(f"{where} has the wrong type")
    return value


def _ident(value, where: str) -> str:
    _expect(value, str, where)
    if not value:
        raise ParseError(f"{where} must be a non-empty string")
    return value


def parse_course(data: bytes | str) -> CourseGraph:
    """Parse a course file without running semantic validation. Structural
    problems (bad JSON, unknown keys, wrong types) raise ParseError."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno)
    if not isinstance(doc, dict):
        raise ParseError("course file must be a JSON object")
    _require_keys(doc, ["meta", "concepts", "variants", "questions"],
                  ["meta", "concepts", "variants", "questions"], "course file")

    meta = _expect(doc["meta"], dict, "meta")
    _require_keys(meta, ["version"], ["version"], "meta")
    version = _expect(meta["version"], int, "meta.version")
    if version != 1:
        raise ParseError(f"unsupported course file version {version}")

    concepts_raw = _expect(doc["concepts"], list, "concepts")
    variants_raw = _expect(doc["variants"], list, "variants")
    questions_raw = _expect(doc["questions"], list, "questions")

    parsed_concepts: list[dict] = []
    for raw in concepts_raw:
        _expect(raw, dict, "concept")
        _require_keys(raw, ["id", "title", "sections"],
                      ["id", "title", "prerequisites", "sections"], "concept")
        cid = _ident(raw["id"], "concept.id")
        title = _expect(raw["title"], str, f"concept {cid!r} title")
        prereqs = [
            _ident(p, f"concept {cid!r} prerequisite")
            for p in _expect(raw.get("prerequisites", []), list, f"concept {cid!r} prerequisites")
        ]
        sections: list[Section] = []
        for rawsec in _expect(raw["sections"], list, f"concept {cid!r} sections"):
            _expect(rawsec, dict, "section")
            _require_keys(rawsec, ["id", "title", "importance_weight"],
                          ["id", "title", "importance_weight"], f"section of concept {cid!r}")
            sections.append(Section(
                id=_ident(rawsec["id"], "section.id"),
                title=_expect(rawsec["title"], str, "section.title"),
                importance_weight=_expect(rawsec["importance_weight"], int, "section.importance_weight"),
            ))
        parsed_concepts.append({
            "id": cid, "title": title, "prerequisites": tuple(prereqs),
            "sections": tuple(sections),
        })

    variants: list[ContentVariant] = []
    for index, raw in enumerate(variants_raw):
        _expect(raw, dict, "variant")
        _require_keys(raw, ["concept_id", "method", "body"],
                      ["concept_id", "section_id", "method", "style_affinity", "level_band", "body"],
                      "variant")
        try:
            method = Method(_expect(raw["method"], str, "variant.method"))
        except ValueError:
            raise ParseError(f"unknown method {raw['method']!r} in variant {index}")
        affinity = set()
        for s in _expect(raw.get("style_affinity", []), list, "variant.style_affinity"):
            try:
                affinity.add(LearningStyle(s))
            except ValueError:
                raise ParseError(f"unknown style {s!r} in variant {index}")
        band = set()
        for lv in _expect(raw.get("level_band", []), list, "variant.level_band"):
            try:
                band.add(LearnerLevel(lv))
            except ValueError:
                raise ParseError(f"unknown learner level {lv!r} in variant {index}")
        body = raw["body"]
        if method is Method.TEXT:
            _expect(body, list, "variant.body")
            body = tuple(_expect(p, str, "variant body page") for p in body)
        else:
            _expect(body, str, "variant.body")
        section_id = raw.get("section_id")
        if section_id is not None:
            section_id = _ident(section_id, "variant.section_id")
        variants.append(ContentVariant(
            concept_id=_ident(raw["concept_id"], "variant.concept_id"),
            method=method, body=body, section_id=section_id,
            style_affinity=frozenset(affinity), level_band=frozenset(band),
            index=index,
        ))

    questions: list[Question] = []
    for raw in questions_raw:
        _expect(raw, dict, "question")
        _require_keys(raw, ["id", "concept_id", "section_id", "difficulty", "points",
                            "scope", "prompt", "choices", "correct"],
                      ["id", "concept_id", "section_id", "difficulty", "points",
                       "scope", "prompt", "choices", "correct"], "question")
        qid = _ident(raw["id"], "question.id")
        try:
            scope = Scope(_expect(raw["scope"], str, f"question {qid!r} scope"))
        except ValueError:
            raise ParseError(f"unknown scope {raw['scope']!r} in question {qid!r}")
        choices = [
            _expect(c, str, f"question {qid!r} choice")
            for c in _expect(raw["choices"], list, f"question {qid!r} choices")
        ]
        questions.append(Question(
            id=qid,
            concept_id=_ident(raw["concept_id"], "question.concept_id"),
            section_id=_ident(raw["section_id"], "question.section_id"),
            difficulty=_expect(raw["difficulty"], int, f"question {qid!r} difficulty"),
            points=_expect(raw["points"], int, f"question {qid!r} points"),
            scope=scope,
            prompt=_expect(raw["prompt"], str, f"question {qid!r} prompt"),
            choices=tuple(choices),
            correct=_expect(raw["correct"], int, f"question {qid!r} correct"),
        ))

    concepts = tuple(
        Concept(
            id=c["id"], title=c["title"], prerequisites=c["prerequisites"],
            sections=c["sections"],
            variants=tuple(v for v in variants if v.concept_id == c["id"]),
        )
        for c in parsed_concepts
    )
    return CourseGraph(
        version=version, concepts=concepts, variants=tuple(variants),
        bank=QuestionBank(tuple(questions)),
    )


# -- validation ------------------------------------------------------------------

def _find_cycle_members(concepts: Sequence[Concept]) -> list[str]:
    """Concept ids that sit on (or behind) a prerequisite cycle, via Kahn's
    algorithm; empty when the graph is acyclic."""
    known = {c.id for c in concepts}
    indegree = {c.id: 0 for c in concepts}
    dependents: dict[str, list[str]] = {c.id: [] for c in concepts}
    for c in concepts:
        for p in c.prerequisites:
            if p in known and p != c.id:
                indegree[c.id] += 1
                dependents[p].append(c.id)
    queue = [cid for cid, deg in indegree.items() if deg == 0]
    removed = 0
    while queue:
        cid = queue.pop()
        removed += 1
        for d in dependents[cid]:
            indegree[d] -= 1
            if indegree[d] == 0:
                queue.append(d)
    return sorted(cid for cid, deg in indegree.items() if deg > 0)


def validate_course(g: CourseGraph, min_questions_per_cell: int = 2) -> list[Violation]:
    """Check every course invariant; returns violations as data (empty list
    means the course is usable)."""
    out: list[Violation] = []
    seen_concepts: set[str] = set()
    concept_ids = set(g.concept_ids)

    for c in g.concepts:
        if c.id in seen_concepts:
            out.append(Violation("duplicate-concept", c.id, "concept id appears twice"))
        seen_concepts.add(c.id)
        if not is_printable_text(c.title):
            out.append(Violation("nonprintable", c.id, "concept title has non-printable characters"))
        if not c.sections:
            out.append(Violation("no-sections", c.id, "concept has no sections"))
        if c.id in c.prerequisites:
            out.append(Violation("self-prerequisite", c.id, "concept lists itself as prerequisite"))
        for p in c.prerequisites:
            if p not in concept_ids:
                out.append(Violation("unknown-prerequisite", f"{c.id}->{p}", "prerequisite id does not resolve"))
        seen_sections: set[str] = set()
        for s in c.sections:
            if s.id in seen_sections:
                out.append(Violation("duplicate-section", f"{c.id}/{s.id}", "section id appears twice in concept"))
            seen_sections.add(s.id)
            if not 1 <= s.importance_weight <= 10:
                out.append(Violation("weight-range", f"{c.id}/{s.id}",
                                     f"importance_weight {s.importance_weight} outside 1-10"))
            if not is_printable_text(s.title):
                out.append(Violation("nonprintable", f"{c.id}/{s.id}", "section title has non-printable characters"))

    cycle = _find_cycle_members(g.concepts)
    if cycle:
        out.append(Violation("cycle", ",".join(cycle), "prerequisite graph has a cycle"))

    for v in g.variants:
        entity = f"variant[{v.index}]"
        c = g.concept(v.concept_id)
        if c is None:
            out.append(Violation("unknown-concept", entity, f"variant names missing concept {v.concept_id!r}"))
            continue
        if v.section_id is not None and c.section(v.section_id) is None:
            out.append(Violation("unknown-section", entity,
                                 f"variant names missing section {v.section_id!r} of {v.concept_id!r}"))
        if (isinstance(v.body, tuple) and not v.body) or (isinstance(v.body, str) and not v.body):
            out.append(Violation("body-empty", entity, "variant body is empty"))
        if v.method is Method.TEXT:
            for page in v.body:
                if not page or not is_printable_text(page):
                    out.append(Violation("nonprintable", entity, "text page empty or non-printable"))
                    break
        elif not is_printable_text(str(v.body)):
            out.append(Violation("nonprintable", entity, "media reference has non-printable characters"))

    # fallback guarantee: every section reachable through a plain-text variant
    for c in g.concepts:
        for s in c.sections:
            covered = any(
                v.method is Method.TEXT and (v.section_id is None or v.section_id == s.id)
                for v in c.variants
            )
            if not covered:
                out.append(Violation("fallback-missing", f"{c.id}/{s.id}",
                                     "no text variant covers this section"))

    seen_questions: set[str] = set()
    for q in g.bank.questions:
        if q.id in seen_questions:
            out.append(Violation("duplicate-question", q.id, "question id appears twice"))
        seen_questions.add(q.id)
        c = g.concept(q.concept_id)
        if c is None:
            out.append(Violation("unknown-concept", q.id, f"question names missing concept {q.concept_id!r}"))
        elif c.section(q.section_id) is None:
            out.append(Violation("unknown-section", q.id,
                                 f"question names missing section {q.section_id!r} of {q.concept_id!r}"))
        if not 1 <= q.difficulty <= 5:
            out.append(Violation("difficulty-range", q.id, f"difficulty {q.difficulty} outside 1-5"))
        if not 1 <= q.points <= 10:
            out.append(Violation("points-range", q.id, f"points {q.points} outside 1-10"))
        if not 2 <= len(q.choices) <= 4:
            out.append(Violation("choices-count", q.id, f"{len(q.choices)} choices, need 2-4"))
        if not 0 <= q.correct < len(q.choices):
            out.append(Violation("correct-range", q.id,
                                 f"correct index {q.correct} outside choices"))
        if not is_printable_text(q.prompt) or any(not is_printable_text(ch) for ch in q.choices):
            out.append(Violation("nonprintable", q.id, "prompt or choice has non-printable characters"))

    for c in g.concepts:
        for s in c.sections:
            for difficulty in range(1, 6):
                have = len(g.bank.by_cell(s.id, difficulty))
                if have < min_questions_per_cell:
                    out.append(Violation(
                        "coverage-cell", f"{s.id}/{difficulty}",
                        f"{have} question(s) for section {s.id!r} difficulty {difficulty}, "
                        f"need {min_questions_per_cell}"))
    return out


def load_course(data: bytes | str, min_questions_per_cell: int = 2) -> CourseGraph:
    """Parse and validate a course file; raises ParseError or ValidationError."""
    g = parse_course(data)
    violations = validate_course(g, min_questions_per_cell)
    if violations:
        raise ValidationError(violations)
    return g


# -- scheduling and variant selection ----------------------------------------------

def next_concepts(
    g: CourseGraph, completed: set[str], deferred: Sequence[str]
) -> list[str]:
    """Concepts whose prerequisites are all completed and which are not yet
    completed, in course order; deferred-but-eligible ones move to the back of
    the queue (that is what relocating a concept means here)."""
    deferred_set = set(deferred)
    eligible = [
        c.id for c in g.concepts
        if c.id not in completed and set(c.prerequisites) <= completed
    ]
    front = [cid for cid in eligible if cid not in deferred_set]
    back = [cid for cid in deferred if cid in eligible]
    return front + back


def _affinity_rank(v: ContentVariant, dominant: LearningStyle) -> int:
    """Explicit style match beats no declaration beats a mismatched declaration."""
    if not v.style_affinity:
        return 1
    return 0 if dominant in v.style_affinity else 2


def select_variant(
    c: Concept,
    m: LearnerModel,
    exclude_methods: frozenset | set = frozenset(),
    matrix: Mapping[LearningStyle, Sequence[Method]] | None = None,
) -> ContentVariant:
    """Pick the content variant to deliver.

    Candidates are the concept's variants whose method is not excluded and
    whose level band admits the learner (an empty band admits everyone, and an
    unleveled learner is admitted anywhere). They are ranked by the dominant
    style's method preference, then whole-concept before section-scoped, then
    declared style affinity, then file order. With no candidate at all the
    plain-text variant is returned even if Text was excluded: exclusion is a
    preference, not a guarantee.
    """
    table = matrix if matrix is not None else DEFAULT_STYLE_METHOD_MATRIX
    prefs = list(table[m.style_profile.dominant])

    def band_admits(v: ContentVariant) -> bool:
        if not v.level_band or m.learner_level is None:
            return True
        return m.learner_level in v.level_band

    candidates = [
        v for v in c.variants
        if v.method not in exclude_methods and band_admits(v)
    ]
    if candidates:
        def rank(v: ContentVariant):
            return (
                prefs.index(v.method) if v.method in prefs else len(prefs),
                0 if v.section_id is None else 1,
                _affinity_rank(v, m.style_profile.dominant),
                v.index,
            )
        return min(candidates, key=rank)

    texts = [v for v in c.variants if v.method is Method.TEXT]
    whole = [v for v in texts if v.section_id is None]
    pool = whole or texts
    if not pool:
        raise ValueError(f"concept {c.id!r} has no text fallback variant")
    return min(pool, key=lambda v: v.index)
