"""HTTP/JSON surface over the service core.

Errors map to {"error": code, "detail": text} with 4xx statuses:
SchemaError 400, ValidationError / InvalidK / GenerationExhausted 422,
SessionNotFound / MissingBox 404, NoPlan / PlanExhausted 409, and plain
ValueError (bad enum values) 400.
"""

from __future__ import annotations

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from . import brg
from .errors import (
    GenerationExhausted,
    InvalidK,
    MissingBox,
    NoPlan,
    PlanExhausted,
    SchemaError,
    SessionNotFound,
    ShelfPlanError,
    ValidationError,
)
from .scene import DEFAULT_PALETTE, generate_scene, scene_to_document
from .service import ServiceCore

_STATUS = {
    SchemaError: 400,
    ValidationError: 422,
    InvalidK: 422,
    GenerationExhausted: 422,
    SessionNotFound: 404,
    MissingBox: 404,
    NoPlan: 409,
    PlanExhausted: 409,
}


def create_app(core: ServiceCore | None = None) -> FastAPI:
    core = core or ServiceCore()
    app = FastAPI(title="shelfplan", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.core = core

    @app.exception_handler(ShelfPlanError)
    async def _domain_error(request: Request, exc: ShelfPlanError):
        status = _STATUS.get(type(exc), 400)
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, ValidationError):
            body["violations"] = list(exc.violations)
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content={"error": "ValueError", "detail": str(exc)})

    @app.post("/sessions", status_code=201)
    async def create_session(document: dict = Body(...)):
        return core.create_session(document)

    @app.get("/sessions/{sid}")
    async def get_state(sid: str):
        return core.session(sid).get_state()

    @app.post("/sessions/{sid}/plan")
    async def request_plan(sid: str, body: dict = Body(...)):
        target = _field(body, "target")
        policy = body.get("policy", "literal")
        return core.session(sid).request_plan(target, policy=policy)

    @app.post("/sessions/{sid}/step")
    async def step_plan(sid: str, body: dict = Body(...)):
        actor = _field(body, "actor")
        return core.session(sid).step_plan(actor).to_document()

    @app.post("/sessions/{sid}/remove")
    async def remove_box(sid: str, body: dict = Body(...)):
        box = _field(body, "box")
        return core.session(sid).remove_box(box).to_document()

    @app.post("/sessions/{sid}/support")
    async def request_support(sid: str, body: dict = Body(...)):
        target = _field(body, "target")
        k = body.get("k", 1)
        if not isinstance(k, int) or isinstance(k, bool):
            raise SchemaError("k: expected an integer")
        ranking = body.get("ranking", "literal")
        return core.session(sid).request_support(target, k, ranking=ranking).to_document()

    @app.post("/sessions/{sid}/pointing")
    async def resolve_pointing(sid: str, document: dict = Body(...)):
        return core.session(sid).resolve_pointing(document).to_document()

    @app.get("/sessions/{sid}/brg.dot", response_class=PlainTextResponse)
    async def brg_dot(sid: str):
        return brg.export_dot(core.session(sid).graph)

    @app.post("/generate")
    async def generate(body: dict = Body(...)):
        seed = body.get("seed", 0)
        boxes = body.get("boxes", 1)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise SchemaError("seed: expected an integer")
        if not isinstance(boxes, int) or isinstance(boxes, bool) or boxes < 1:
            raise SchemaError("boxes: expected a positive integer")
        palette = body.get("palette")
        if palette is not None:
            try:
                palette = tuple(tuple(float(v) for v in entry) for entry in palette)
            except (TypeError, ValueError) as exc:
                raise SchemaError("palette: expected a list of [w, d, h] triples") from exc
            if any(len(entry) != 3 for entry in palette):
                raise SchemaError("palette: expected a list of [w, d, h] triples")
        scene = generate_scene(seed, boxes, palette=palette or DEFAULT_PALETTE)
        return scene_to_document(scene)

    return app


def _field(body: dict, name: str) -> str:
    value = body.get(name)
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{name}: expected a non-empty string")
    return value
