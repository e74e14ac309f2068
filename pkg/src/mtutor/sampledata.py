"""Built-in sample course and profiler for quickstarts and demos.

A small astronomy course: three concepts in a line, two sections each, all
four presentation methods, and four questions per (section, difficulty) cell
so a learner can fail and repeat without exhausting the bank.
"""

from __future__ import annotations

import json
from pathlib import Path

_CONCEPTS = [
    ("c-moon", "The Moon", [], [
        ("s-phases", "Moon phases", 8),
        ("s-orbit", "The lunar orbit", 5),
    ]),
    ("c-planets", "The planets", ["c-moon"], [
        ("s-inner", "Inner planets", 7),
        ("s-outer", "Outer planets", 5),
    ]),
    ("c-stars", "Stars", ["c-planets"], [
        ("s-sun", "The Sun", 9),
        ("s-lifecycle", "Stellar life cycles", 6),
    ]),
]

_TEXT_PAGES = {
    "c-moon": [
        "The Moon shows phases because we see changing fractions of its sunlit half as it orbits Earth.",
        "A full cycle from new moon to new moon takes about 29.5 days, the synodic month.",
        "The same face always points at Earth: the Moon's spin is tidally locked to its orbit.",
    ],
    "c-planets": [
        "The four inner planets are small, rocky, and close to the Sun: Mercury, Venus, Earth, Mars.",
        "The outer planets are giants. Jupiter and Saturn are mostly gas; Uranus and Neptune are ice giants.",
        "A planet clears its own orbit; that rule is what separates planets from dwarf planets.",
    ],
    "c-stars": [
        "The Sun is an ordinary main-sequence star fusing hydrogen into helium in its core.",
        "A star's mass fixes its fate: modest stars end as white dwarfs, heavy ones explode as supernovae.",
        "Star colors track surface temperature: red stars are cool, blue stars are hot.",
    ],
}

_STEM = "{title}, check {d}.{i}: which statement holds?"
_CHOICES = [
    "Statement {a} is the accurate one.",
    "Statement {b} is the accurate one.",
    "Statement {c} is the accurate one.",
    "Statement {d} is the accurate one.",
]


def sample_course() -> dict:
    concepts = []
    variants = []
    questions = []
    for cid, title, prereqs, sections in _CONCEPTS:
        concepts.append({
            "id": cid,
            "title": title,
            "prerequisites": prereqs,
            "sections": [
                {"id": sid, "title": stitle, "importance_weight": weight}
                for sid, stitle, weight in sections
            ],
        })
        variants.append({"concept_id": cid, "method": "text", "body": _TEXT_PAGES[cid]})
        short = cid.split("-", 1)[1]
        variants.append({"concept_id": cid, "method": "film",
                         "body": f"film://{short}-overview"})
        variants.append({"concept_id": cid, "method": "dynamic_view",
                         "body": f"dynview://{short}-interactive"})
        variants.append({"concept_id": cid, "method": "game",
                         "body": f"game://{short}-quiz-run"})
        for sid, stitle, _ in sections:
            for d in range(1, 6):
                for i in range(1, 5):
                    letters = ["A", "B", "C", "D"]
                    questions.append({
                        "id": f"q-{sid[2:]}-{d}-{i}",
                        "concept_id": cid,
                        "section_id": sid,
                        "difficulty": d,
                        "points": d,
                        "scope": "conceptual" if i % 2 == 1 else "objective",
                        "prompt": _STEM.format(title=stitle, d=d, i=i),
                        "choices": [
                            c.format(a=letters[0], b=letters[1], c=letters[2], d=letters[3])
                            for c in _CHOICES
                        ],
                        "correct": (d + i) % 4,
                    })
    return {
        "meta": {"version": 1},
        "concepts": concepts,
        "variants": variants,
        "questions": questions,
    }


_PROFILER_ITEMS = [
    ("p01", "A brand-new topic opens up. What is your first move?", [
        ("a", "Dive in and try something immediately", "SS"),
        ("b", "Set a target for what to finish today", "GOA"),
        ("c", "Ask someone how they got started", "EIA"),
        ("d", "Lay out a step-by-step plan", "CA"),
        ("e", "Read the background material end to end", "DLA"),
    ]),
    ("p02", "Which reward feels best after studying?", [
        ("a", "The thrill of something unexpected working", "SS"),
        ("b", "Ticking the goal off my list", "GOA"),
        ("c", "Sharing the result with others", "EIA"),
        ("d", "Knowing every exercise is done properly", "CA"),
        ("e", "Finally understanding why it works", "DLA"),
    ]),
    ("p03", "A practice question stumps you. You usually:", [
        ("a", "Guess boldly and see what happens", "SS"),
        ("b", "Skip it, keep moving, return at the end", "GOA"),
        ("c", "Talk it through with a classmate", "EIA"),
        ("d", "Re-check the worked examples methodically", "CA"),
        ("e", "Go back to first principles", "DLA"),
    ]),
    ("p04", "Your ideal lesson is:", [
        ("a", "Hands-on with surprises", "SS"),
        ("b", "Short, focused, outcome-driven", "GOA"),
        ("c", "A lively group discussion", "EIA"),
        ("d", "A clear sequence with checkpoints", "CA"),
        ("e", "A deep dive into one idea", "DLA"),
    ]),
    ("p05", "When a deadline is far away, you:", [
        ("a", "Chase whatever looks most interesting now", "SS"),
        ("b", "Break it into milestones and start early", "GOA"),
        ("c", "Form a study group first", "EIA"),
        ("d", "Build a schedule and follow it", "CA"),
        ("e", "Collect and read sources before anything else", "DLA"),
    ]),
    ("p06", "Mistakes in your work make you:", [
        ("a", "Shrug; experiments fail sometimes", "SS"),
        ("b", "Re-plan so the goal is still reachable", "GOA"),
        ("c", "Ask for feedback on what went wrong", "EIA"),
        ("d", "Audit every step to find the slip", "CA"),
        ("e", "Question whether I truly understood it", "DLA"),
    ]),
    ("p07", "The study material you reach for first:", [
        ("a", "An interactive demo or game", "SS"),
        ("b", "A summary sheet of what is examinable", "GOA"),
        ("c", "A recorded walkthrough by a person", "EIA"),
        ("d", "The official textbook chapter", "CA"),
        ("e", "A long-form article with derivations", "DLA"),
    ]),
    ("p08", "Progress feels real when:", [
        ("a", "Each session brings something new", "SS"),
        ("b", "My scores keep rising", "GOA"),
        ("c", "I can explain it to a friend", "EIA"),
        ("d", "My notes are complete and tidy", "CA"),
        ("e", "I can derive it without notes", "DLA"),
    ]),
    ("p09", "Before an exam you mostly:", [
        ("a", "Do rapid-fire practice rounds", "SS"),
        ("b", "Drill exactly the topics likely to appear", "GOA"),
        ("c", "Quiz with a partner", "EIA"),
        ("d", "Work through the syllabus in order", "CA"),
        ("e", "Re-derive the core results once more", "DLA"),
    ]),
    ("p10", "Pick the phrase closest to you:", [
        ("a", "Learning should feel like an adventure", "SS"),
        ("b", "Learning is getting measurably better", "GOA"),
        ("c", "Learning happens between people", "EIA"),
        ("d", "Learning is disciplined practice", "CA"),
        ("e", "Learning is understanding deeply", "DLA"),
    ]),
]


def sample_profiler() -> dict:
    return {"items": [
        {
            "id": item_id,
            "prompt": prompt,
            "options": [
                {"id": oid, "label": label, "increments": {style: 2}}
                for oid, label, style in options
            ],
        }
        for item_id, prompt, options in _PROFILER_ITEMS
    ]}


def sample_config(directory: str = ".") -> dict:
    base = Path(directory)
    return {
        "course": str(base / "course.json"),
        "profiler": str(base / "profiler.json"),
        "data_dir": str(base / "data"),
        "listen": "127.0.0.1:8000",
    }


def write_samples(directory: str | Path) -> list[Path]:
    """Write course.json, profiler.json, and config.json into ``directory``."""
    base = Path(directory)
    base.mkdir(parents=True, exist_ok=True)
    written = []
    for name, doc in [
        ("course.json", sample_course()),
        ("profiler.json", sample_profiler()),
        ("config.json", sample_config(str(base))),
    ]:
        path = base / name
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        written.append(path)
    return written
