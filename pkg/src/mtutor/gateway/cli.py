"""Command line entry points: serve, validate, simulate, report, sample."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..config import GatewayConfig, load_config
from ..errors import ParseError, TutorError
from ..kb import load_course, parse_course, validate_course
from ..learner import load_questionnaire
from ..sampledata import write_samples
from ..store import EventStore
from .simulate import CohortSpec, report_to_csv, run_cohort

log = logging.getLogger("mtutor")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file (or set TUTOR_CONFIG)")
    p.add_argument("--course", help="course file path")
    p.add_argument("--profiler", help="profiler questionnaire path")
    p.add_argument("--data-dir", help="learner data directory")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def _resolve_config(args) -> GatewayConfig:
    cfg = load_config(getattr(args, "config", None))
    if getattr(args, "course", None):
        cfg.course = args.course
    if getattr(args, "profiler", None):
        cfg.profiler = args.profiler
    if getattr(args, "data_dir", None):
        cfg.data_dir = args.data_dir
    if getattr(args, "listen", None):
        host, _, port = args.listen.rpartition(":")
        cfg.listen_host, cfg.listen_port = host, int(port)
    return cfg


def _load_course_file(path: str, min_per_cell: int):
    return load_course(Path(path).read_bytes(), min_per_cell)


def cmd_serve(args) -> int:
    import uvicorn

    from .http import build_app
    from .service import build_service

    cfg = _resolve_config(args)
    if not cfg.course or not cfg.profiler:
        print("serve needs --course and --profiler (or a config file)", file=sys.stderr)
        return 2
    course = _load_course_file(cfg.course, cfg.engine.min_questions_per_cell)
    questionnaire = load_questionnaire(Path(cfg.profiler).read_bytes())
    service = build_service(
        course, questionnaire, cfg.data_dir, cfg.engine,
        fsync=cfg.fsync, seed=args.seed)
    app = build_app(service)
    log.info("serving on %s:%d (data in %s)", cfg.listen_host, cfg.listen_port, cfg.data_dir)
    uvicorn.run(app, host=cfg.listen_host, port=cfg.listen_port, log_level="warning")
    return 0


def cmd_validate(args) -> int:
    try:
        graph = parse_course(Path(args.course_file).read_bytes())
    except ParseError as exc:
        print(f"parse error: {exc.message}", file=sys.stderr)
        return 1
    violations = validate_course(graph, args.min_questions_per_cell)
    for v in violations:
        print(f"{v.rule}  {v.entity}  {v.message}")
    print(f"{len(violations)} violations")
    return 0 if not violations else 1


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    if not cfg.course:
        print("simulate needs --course (or a config file)", file=sys.stderr)
        return 2
    course = _load_course_file(cfg.course, cfg.engine.min_questions_per_cell)
    spec = CohortSpec(
        n=args.learners,
        seed=args.seed,
        ability_mean=args.ability_mean,
        ability_sd=args.ability_sd,
        match_bonus=args.match_bonus,
        style_match=args.style_match == "on",
        max_sessions=args.max_sessions,
    )
    report = run_cohort(course, cfg.engine, spec)
    header = (f"{'learners':>8}  {'ability':>8}  {'match':>5}  {'sessions':>8}  "
              f"{'completed':>9}  {'skipped':>7}  {'deferred':>8}  "
              f"{'compl_rate':>10}  {'mean_att':>8}  {'mean_post':>9}")
    mean_post = ("-" if report.mean_post_score is None
                 else f"{report.mean_post_score:.2f}")
    row = (f"{spec.n:>8}  {spec.ability_mean:>8.2f}  "
           f"{'on' if spec.style_match else 'off':>5}  {report.sessions_total:>8}  "
           f"{report.completed:>9}  {report.skipped:>7}  {report.deferred:>8}  "
           f"{report.completion_rate:>10.3f}  {report.mean_attempts:>8.3f}  {mean_post:>9}")
    print(header)
    print(row)
    if args.csv:
        Path(args.csv).write_text(report_to_csv(report), encoding="utf-8")
        log.info("per-learner CSV written to %s", args.csv)
    return 0


def cmd_report(args) -> int:
    cfg = _resolve_config(args)
    if not cfg.course:
        print("report needs --course (or a config file)", file=sys.stderr)
        return 2
    course = _load_course_file(cfg.course, cfg.engine.min_questions_per_cell)
    store = EventStore(cfg.data_dir, course, cfg.engine, fsync=False)
    try:
        model = store.load_learner(args.learner_id)
        events = store.events(args.learner_id)
    except TutorError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    print(f"learner   {model.learner_id}")
    print(f"style     {model.style_profile.dominant.value}")
    level = model.learner_level.value if model.learner_level else "not assessed"
    print(f"level     {level}")
    print(f"events    {len(events)}")
    print(f"questions {len(model.asked_questions)} asked in total")
    if model.concept_records:
        print("concepts:")
        for cid, rec in sorted(model.concept_records.items()):
            conceptual = rec.conceptual_level.value if rec.conceptual_level else "-"
            objective = rec.objective_level.value if rec.objective_level else "-"
            print(f"  {cid:<16} {rec.status.value:<12} attempts={rec.attempts} "
                  f"conceptual={conceptual} objective={objective}")
    return 0


def cmd_sample(args) -> int:
    written = write_samples(args.dir)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtutor",
        description="Adaptive tutoring engine: serve the API, validate courses, "
                    "run simulated cohorts, or inspect learner history.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    _add_common(p)
    p.add_argument("--listen", help="host:port (default 127.0.0.1:8000)")
    p.add_argument("--seed", type=int, default=0, help="base seed for session planning")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate", help="check a course file")
    p.add_argument("course_file")
    p.add_argument("--min-questions-per-cell", type=int, default=2)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a simulated cohort")
    _add_common(p)
    p.add_argument("--learners", type=int, default=100)
    p.add_argument("--ability-mean", type=float, default=0.0)
    p.add_argument("--ability-sd", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--style-match", choices=["on", "off"], default="on")
    p.add_argument("--match-bonus", type=float, default=0.0)
    p.add_argument("--max-sessions", type=int, default=50)
    p.add_argument("--csv", help="write per-learner rows to this file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="print a learner's replayed history")
    _add_common(p)
    p.add_argument("learner_id")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sample", help="write a sample course, profiler, and config")
    p.add_argument("--dir", default="./sample")
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except TutorError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
