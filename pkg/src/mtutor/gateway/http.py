"""HTTP API over the tutoring service.

JSON in, JSON out; every engine error surfaces as {"code", "message"} with
the module error name as the code, so clients can map messages exhaustively.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import (
    ActiveSessionExists,
    TutorError,
    UnknownConcept,
    UnknownLearner,
    UnknownSession,
    WrongInputKind,
    error_codes,
)
from ..session import prompt_to_dict
from .service import TutorService
from .sms import SmsGateway

_STATUS_404 = (UnknownLearner, UnknownSession, UnknownConcept)


def _status_for(exc: TutorError) -> int:
    if isinstance(exc, _STATUS_404):
        return 404
    if isinstance(exc, ActiveSessionExists):
        return 409
    return 400


class CreateLearnerBody(BaseModel):
    name: str = ""


class ProfilerBody(BaseModel):
    answers: list[tuple[str, str]]


class StartSessionBody(BaseModel):
    learner_id: str
    concept_id: str | None = None


class SessionInputBody(BaseModel):
    answer: int | None = None
    next: bool | None = None


class SmsBody(BaseModel):
    model_config = {"populate_by_name": True}

    from_: str = Field(alias="from")
    text: str


def build_app(service: TutorService) -> FastAPI:
    app = FastAPI(title="tutoring gateway", docs_url=None, redoc_url=None)
    sms = SmsGateway(service)

    @app.exception_handler(TutorError)
    async def tutor_error_handler(request: Request, exc: TutorError):
        return JSONResponse(status_code=_status_for(exc), content=exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "ParseError", "message": str(exc.errors()[:1])},
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/meta/error-codes")
    def meta_error_codes():
        return {"codes": error_codes()}

    @app.get("/course")
    def course():
        return {"concepts": [
            {
                "id": c.id,
                "title": c.title,
                "prerequisites": list(c.prerequisites),
                "sections": [{"id": s.id, "title": s.title} for s in c.sections],
            }
            for c in service.course.concepts
        ]}

    @app.get("/profiler")
    def profiler():
        return {"items": [
            {
                "id": item.id,
                "prompt": item.prompt,
                "options": [{"id": o.id, "label": o.label} for o in item.options],
            }
            for item in service.questionnaire.items
        ]}

    @app.post("/learners")
    def create_learner(body: CreateLearnerBody):
        return {"learner_id": service.create_learner(body.name)}

    @app.post("/learners/{learner_id}/profiler")
    def submit_profiler(learner_id: str, body: ProfilerBody):
        profile = service.submit_profiler(learner_id, body.answers)
        return profile.to_dict()

    @app.get("/learners/{learner_id}/progress")
    def progress(learner_id: str):
        return service.progress(learner_id)

    @app.post("/sessions")
    def start_session(body: StartSessionBody):
        session_id, prompt = service.start(body.learner_id, body.concept_id)
        state = service.session(session_id).state
        return {
            "session_id": session_id,
            "prompt": prompt_to_dict(prompt),
            "state": state.value,
        }

    @app.post("/sessions/{session_id}/input")
    def session_input(session_id: str, body: SessionInputBody):
        if body.answer is not None and body.next:
            raise WrongInputKind("send either an answer or next, not both")
        if body.answer is not None:
            user_input: int | str = body.answer
        elif body.next:
            user_input = "next"
        else:
            raise WrongInputKind("body needs an answer index or next=true")
        prompts, state = service.submit_input(session_id, user_input)
        rendered = [prompt_to_dict(p) for p in prompts]
        return {
            "session_id": session_id,
            "prompts": rendered,
            "prompt": rendered[-1] if rendered else None,
            "state": state.value,
        }

    @app.post("/sms/inbound")
    def sms_inbound(body: SmsBody):
        return {"outbound": sms.handle_inbound(body.from_, body.text)}

    return app
