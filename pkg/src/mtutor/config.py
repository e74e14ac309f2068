"""Engine and gateway configuration.

All tuning knobs (repeat budget, test sizes, difficulty bands, the
style-to-method preference matrix) live here with their defaults; a JSON
config file pointed at by TUTOR_CONFIG or --config supplies overrides, and
CLI flags override the file.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .assessment import DEFAULT_DIFFICULTY_BANDS, default_count
from .errors import ParseError
from .kb import DEFAULT_STYLE_METHOD_MATRIX, Method
from .learner import KnowledgeLevel, LearnerLevel, LearningStyle

ENV_VAR = "TUTOR_CONFIG"


@dataclass
class EngineConfig:
    """Knobs consumed by the session, assessment, and kb modules."""

    max_repeats: int = 2
    min_questions_per_cell: int = 2
    pretest_count: int | None = None   # None: twice the section count, clipped
    posttest_count: int | None = None
    difficulty_bands: dict[LearnerLevel, frozenset[int]] = field(
        default_factory=lambda: dict(DEFAULT_DIFFICULTY_BANDS))
    style_method_matrix: dict[LearningStyle, tuple[Method, ...]] = field(
        default_factory=lambda: dict(DEFAULT_STYLE_METHOD_MATRIX))
    pass_level: KnowledgeLevel = KnowledgeLevel.GOOD
    skip_level: KnowledgeLevel = KnowledgeLevel.EXCELLENT
    initial_learner_level: LearnerLevel = LearnerLevel.SLOW_LEARNER
    forced_method: Method | None = None  # simulator knob: bypass style-driven selection

    def count_for(self, phase_is_pretest: bool, section_count: int) -> int:
        configured = self.pretest_count if phase_is_pretest else self.posttest_count
        return configured if configured is not None else default_count(section_count)

    def copy(self) -> "EngineConfig":
        return copy.deepcopy(self)


@dataclass
class GatewayConfig:
    course: str | None = None
    profiler: str | None = None
    data_dir: str = "./data"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8000
    fsync: bool = True
    engine: EngineConfig = field(default_factory=EngineConfig)


_ENGINE_KEYS = {
    "max_repeats", "min_questions_per_cell", "pretest_count", "posttest_count",
    "difficulty_bands", "style_method_matrix", "pass_level", "skip_level",
    "initial_learner_level",
}
_GATEWAY_KEYS = {"course", "profiler", "data_dir", "listen", "fsync"} | _ENGINE_KEYS


def _parse_listen(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not port.isdigit():
        raise ParseError(f"listen address {value!r} must look like host:port")
    return host, int(port)


def config_from_dict(doc: dict) -> GatewayConfig:
    for key in doc:
        if key not in _GATEWAY_KEYS:
            raise ParseError(f"unknown config key {key!r}")
    cfg = GatewayConfig()
    if "course" in doc:
        cfg.course = doc["course"]
    if "profiler" in doc:
        cfg.profiler = doc["profiler"]
    if "data_dir" in doc:
        cfg.data_dir = doc["data_dir"]
    if "listen" in doc:
        cfg.listen_host, cfg.listen_port = _parse_listen(doc["listen"])
    if "fsync" in doc:
        cfg.fsync = bool(doc["fsync"])

    eng = cfg.engine
    try:
        if "max_repeats" in doc:
            eng.max_repeats = int(doc["max_repeats"])
        if "min_questions_per_cell" in doc:
            eng.min_questions_per_cell = int(doc["min_questions_per_cell"])
        if "pretest_count" in doc and doc["pretest_count"] is not None:
            eng.pretest_count = int(doc["pretest_count"])
        if "posttest_count" in doc and doc["posttest_count"] is not None:
            eng.posttest_count = int(doc["posttest_count"])
        if "difficulty_bands" in doc:
            eng.difficulty_bands = {
                LearnerLevel(name): frozenset(int(d) for d in values)
                for name, values in doc["difficulty_bands"].items()
            }
        if "style_method_matrix" in doc:
            eng.style_method_matrix = {
                LearningStyle(name): tuple(Method(v) for v in values)
                for name, values in doc["style_method_matrix"].items()
            }
        if "pass_level" in doc:
            eng.pass_level = KnowledgeLevel(doc["pass_level"])
        if "skip_level" in doc:
            eng.skip_level = KnowledgeLevel(doc["skip_level"])
        if "initial_learner_level" in doc:
            eng.initial_learner_level = LearnerLevel(doc["initial_learner_level"])
    except (ValueError, TypeError, AttributeError) as exc:
        raise ParseError(f"bad config value: {exc}")
    if eng.max_repeats < 0:
        raise ParseError("max_repeats must be >= 0")
    if eng.min_questions_per_cell < 0:
        raise ParseError("min_questions_per_cell must be >= 0")
    return cfg


def load_config(path: str | os.PathLike | None = None) -> GatewayConfig:
    """Load configuration from ``path``, falling back to the TUTOR_CONFIG
    environment variable; with neither set, returns pure defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return GatewayConfig()
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in config: {exc.msg}", line=exc.lineno, column=exc.colno)
    if not isinstance(doc, dict):
        raise ParseError("config file must be a JSON object")
    return config_from_dict(doc)
