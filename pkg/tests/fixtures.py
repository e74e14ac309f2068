"""Shared builders and independently written checkers for the test suite.

The checkers here (plan constraint validator, exhaustive feasibility search,
score arithmetic) deliberately avoid calling back into the planner or grader
internals so they can serve as oracles.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter

from mtutor.kb import Concept, CourseGraph, load_course
from mtutor.learner import Questionnaire, load_questionnaire

STYLES = ("SS", "GOA", "EIA", "CA", "DLA")
METHOD_VALUES = ("text", "film", "dynamic_view", "game")
DIFFICULTIES = (1, 2, 3, 4, 5)


# -- course builders -------------------------------------------------------------

def course_doc(
    concepts=(("c1", ()),),
    sections=2,
    per_cell=2,
    methods=METHOD_VALUES,
    points="unit",
    correct=0,
    n_choices=4,
    difficulties=DIFFICULTIES,
):
    """Build a course-file dict.

    ``concepts`` is a sequence of (id, prerequisites). ``sections`` is either a
    per-concept count (weights then descend 9, 8, ...) or a dict mapping
    concept id to a list of (section_id, weight). ``per_cell`` chooses how many
    questions each (section, difficulty) cell gets. ``correct`` is a fixed
    index or a callable (section_id, difficulty, i) -> index.
    """
    doc = {"meta": {"version": 1}, "concepts": [], "variants": [], "questions": []}
    for cid, prereqs in concepts:
        if isinstance(sections, dict):
            secs = sections[cid]
        else:
            secs = [(f"{cid}-s{k + 1}", 9 - k) for k in range(sections)]
        doc["concepts"].append({
            "id": cid,
            "title": f"Concept {cid}",
            "prerequisites": list(prereqs),
            "sections": [
                {"id": sid, "title": f"Section {sid}", "importance_weight": w}
                for sid, w in secs
            ],
        })
        for method in methods:
            body = (
                [f"{cid} {method} page one.", f"{cid} {method} page two."]
                if method == "text" else f"{method}://{cid}"
            )
            doc["variants"].append({"concept_id": cid, "method": method, "body": body})
        for sid, _w in secs:
            for d in difficulties:
                for i in range(per_cell):
                    doc["questions"].append({
                        "id": f"q-{sid}-{d}-{i}",
                        "concept_id": cid,
                        "section_id": sid,
                        "difficulty": d,
                        "points": 1 if points == "unit" else d,
                        "scope": "conceptual" if i % 2 == 0 else "objective",
                        "prompt": f"Question {sid} {d}.{i}?",
                        "choices": [f"choice {j}" for j in range(n_choices)],
                        "correct": correct(sid, d, i) if callable(correct) else correct,
                    })
    return doc


def build_course(min_per_cell: int = 0, **kw) -> CourseGraph:
    """Load a built course. Coverage checking is off by default so sparse
    fixture banks (single difficulties, single questions) stay loadable."""
    return load_course(json.dumps(course_doc(**kw)), min_per_cell)


def questionnaire_doc(items=5, options=5, increment=2):
    doc = {"items": []}
    for i in range(items):
        doc["items"].append({
            "id": f"p{i + 1}",
            "prompt": f"Profiler item {i + 1}?",
            "options": [
                {
                    "id": chr(ord("a") + j),
                    "label": f"Option {j + 1}",
                    "increments": {STYLES[j % len(STYLES)]: increment},
                }
                for j in range(options)
            ],
        })
    return doc


def build_questionnaire(**kw) -> Questionnaire:
    return load_questionnaire(json.dumps(questionnaire_doc(**kw)))


def style_answers(questionnaire: Questionnaire, style: str):
    """Answers that pick, for every item, the first option incrementing ``style``."""
    out = []
    for item in questionnaire.items:
        for opt in item.options:
            if any(s.value == style and inc > 0 for s, inc in opt.increments.items()):
                out.append((item.id, opt.id))
                break
    return out


# -- independent plan checkers ----------------------------------------------------

def expected_section_counts(concept: Concept, count: int) -> Counter:
    """Forced per-section allotment: even split, remainder to the heaviest
    sections (ties broken by declaration order)."""
    n = len(concept.sections)
    base, extra = divmod(count, n)
    ranked = sorted(
        range(n), key=lambda i: (-concept.sections[i].importance_weight, i)
    )
    out = Counter({s.id: base for s in concept.sections})
    for i in ranked[:extra]:
        out[concept.sections[i].id] += 1
    return out


def expected_section_sequence(concept: Concept, counts: Counter) -> list[str]:
    """Round-robin visit order over sections in declaration order."""
    remaining = dict(counts)
    out: list[str] = []
    while sum(remaining.values()):
        for s in concept.sections:
            if remaining.get(s.id, 0) > 0:
                out.append(s.id)
                remaining[s.id] -= 1
    return out


def check_plan(plan, g: CourseGraph, concept_id: str, band, asked, count) -> list[str]:
    """Validate a TestPlan against the selection constraints. Returns a list of
    human-readable violations (empty when the plan is clean)."""
    concept = g.concept(concept_id)
    errors: list[str] = []
    qs = [g.bank.question(qid) for qid in plan.items]
    if any(q is None for q in qs):
        return ["plan references a question missing from the bank"]

    if len(plan.items) != count:
        errors.append(f"plan has {len(plan.items)} items, wanted {count}")
    if len(set(plan.items)) != len(plan.items):
        errors.append("plan repeats a question within itself")
    repeats = set(plan.items) & set(asked)
    if repeats:
        errors.append(f"plan repeats previously asked questions {sorted(repeats)}")

    band = set(band)
    for q in qs:
        if q.concept_id != concept_id:
            errors.append(f"{q.id} belongs to concept {q.concept_id}")
        if q.difficulty not in band:
            errors.append(f"{q.id} difficulty {q.difficulty} outside band {sorted(band)}")

    got_counts = Counter(q.section_id for q in qs)
    want_counts = expected_section_counts(concept, count)
    if got_counts != want_counts:
        errors.append(f"section counts {dict(got_counts)} != {dict(want_counts)}")
    elif [q.section_id for q in qs] != expected_section_sequence(concept, want_counts):
        errors.append("sections not visited round-robin in declaration order")

    for section in concept.sections:
        sub = [q for q in qs if q.section_id == section.id]
        diffs = [q.difficulty for q in sub]
        if diffs != sorted(diffs):
            errors.append(f"section {section.id} difficulties not ascending: {diffs}")
        # All-levels rule: a difficulty may only repeat once every other
        # difficulty that still has an eligible question has been used as often.
        chosen = Counter(diffs)
        eligible = {
            d: sum(
                1 for q in g.bank.for_concept(concept_id)
                if q.section_id == section.id and q.difficulty == d
                and q.id not in asked
            )
            for d in band
        }
        for d, n in chosen.items():
            for other in band:
                if other == d:
                    continue
                short = min(n - 1, eligible[other])
                if chosen.get(other, 0) < short:
                    errors.append(
                        f"section {section.id}: difficulty {d} chosen {n} times while "
                        f"{other} (eligible {eligible[other]}) chosen {chosen.get(other, 0)}"
                    )
    return errors


def feasible_by_enumeration(g: CourseGraph, concept_id: str, band, asked, count) -> bool:
    """Exhaustive search: does any selection of ``count`` distinct, unasked,
    in-band questions hit the forced per-section allotment?"""
    concept = g.concept(concept_id)
    want = expected_section_counts(concept, count)
    eligible = [
        q for q in g.bank.for_concept(concept_id)
        if q.difficulty in set(band) and q.id not in asked
    ]
    if len(eligible) < count:
        return False
    for combo in itertools.combinations(eligible, count):
        if Counter(q.section_id for q in combo) == want:
            return True
    return False


# -- grading arithmetic oracle ------------------------------------------------------

def oracle_percent(earned: int, total: int) -> int:
    """Round-half-up percentage via decimal arithmetic, independent of the
    integer formula under test."""
    from decimal import ROUND_HALF_UP, Decimal

    return int(
        (Decimal(100 * earned) / Decimal(total)).quantize(0, rounding=ROUND_HALF_UP)
    )
