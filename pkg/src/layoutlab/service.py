"""HTTP API over the pipeline: layouts, dialog sessions, generation runs.

Every error response has the shape ``{"error": {"code": ..., "message":
...}}``.  Generation work runs on a bounded thread pool; the synchronous
endpoints wait on it (with a timeout), and ``?async=true`` returns a run
id immediately for status polling.
"""

from __future__ import annotations

import contextlib
import dataclasses
import threading
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse, Response
from pydantic import BaseModel

from . import bench
from .generator import (
    GenerationConfig,
    ImageStageError,
    LayoutStageError,
    generate_image,
    layout_from_caption,
)
from .geometry import Layout, layout_from_json, layout_to_json
from .llm import (
    DEFAULT_TEMPLATE,
    DialogSession,
    HttpLlm,
    LlmError,
    default_mock,
    dialog_turn,
    start_session,
    template_for_language,
)
from .render import render_layout_svg
from .store import AppConfig, RunNotFound, RunRecord, RunStatus, RunStore, new_run_id

__all__ = ["create_app", "serve", "api_error"]


def api_error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


class LayoutRequest(BaseModel):
    caption: str
    language: str | None = None


class TurnRequest(BaseModel):
    instruction: str


class GenerateRequest(BaseModel):
    layout: dict
    caption: str = ""
    config: dict | None = None


class PipelineRequest(BaseModel):
    caption: str
    language: str | None = None
    config: dict | None = None


class BenchmarkRequest(BaseModel):
    kind: str = "all"
    n: int = 10
    seed: int = 0
    backend: str = "mock"


def _session_json(session: DialogSession) -> dict:
    return {
        "id": session.id,
        "messages": [{"role": m.role, "content": m.content} for m in session.messages],
        "layout": None if session.current_layout is None else layout_to_json(session.current_layout),
        "diagnostic": None
        if session.last_diagnostic is None
        else {"kind": session.last_diagnostic.kind.value, "message": session.last_diagnostic.message},
        "created_at": session.created_at,
        "updated_at": session.updated_at,
    }


def _record_json(record: RunRecord, store: RunStore) -> dict:
    payload = record.to_json()
    run_dir = store.run_dir(record.id)
    payload["artifacts"] = (
        sorted(p.name for p in run_dir.iterdir() if p.name != "record.json")
        if run_dir.is_dir()
        else []
    )
    return payload


def create_app(config: AppConfig | None = None, backend=None) -> FastAPI:
    """Build the application; ``backend`` overrides the LLM for tests."""
    config = config or AppConfig.load()
    config.ensure_writable()
    store = RunStore(config.data_dir)
    if backend is None and config.use_mock_llm:
        backend = default_mock()

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.pool = ThreadPoolExecutor(max_workers=config.parallelism)
        try:
            yield
        finally:
            app.state.pool.shutdown(wait=True)

    app = FastAPI(title="layoutlab", lifespan=lifespan)
    app.state.config = config
    app.state.store = store
    app.state.sessions = {}
    app.state.session_locks = {}
    sessions_guard = threading.Lock()

    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(HTTPException)
    async def http_error(_request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict) or "code" not in detail:
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    @app.exception_handler(RequestValidationError)
    async def validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "bad_request", "message": str(exc.errors())}},
        )

    def _gen_config(overrides: dict | None) -> GenerationConfig:
        if not overrides:
            return config.generation
        coerced = {
            k: tuple(v) if k in ("latent_shape", "canvas") else v for k, v in overrides.items()
        }
        try:
            return dataclasses.replace(config.generation, **coerced)
        except (TypeError, ValueError) as exc:
            raise api_error(400, "bad_request", f"bad generation config: {exc}") from exc

    def _parse_body_layout(payload: dict) -> Layout:
        try:
            return layout_from_json(payload)
        except ValueError as exc:
            raise api_error(400, "bad_request", f"bad layout: {exc}") from exc

    def _session_lock(session_id: str) -> threading.Lock:
        with sessions_guard:
            return app.state.session_locks.setdefault(session_id, threading.Lock())

    def _get_session(session_id: str) -> DialogSession:
        session = app.state.sessions.get(session_id)
        if session is None:
            raise api_error(404, "not_found", f"no session {session_id!r}")
        return session

    def _run_generation(record: RunRecord, layout: Layout, gen_config: GenerationConfig) -> RunRecord:
        """Drive one record through the image stage, persisting progress."""
        record = record.advanced(RunStatus.LAYOUT_DONE, layout=layout)
        store.save(record)
        try:
            generate_image(
                layout, gen_config, out_dir=store.run_dir(record.id), caption=record.caption
            )
        except (LayoutStageError, ImageStageError) as exc:
            stage = "layout" if isinstance(exc, LayoutStageError) else "image"
            record = record.advanced(RunStatus.FAILED, error=f"{stage} stage: {exc}")
            store.save(record)
            return record
        record = record.advanced(RunStatus.IMAGE_DONE)
        store.save(record)
        return record

    def _submit_or_wait(record: RunRecord, layout: Layout, gen_config: GenerationConfig, wait: bool):
        future = app.state.pool.submit(_run_generation, record, layout, gen_config)
        if not wait:
            return JSONResponse(status_code=202, content=_record_json(record, store))
        try:
            record = future.result(timeout=config.sync_timeout_s)
        except FutureTimeout:
            raise api_error(
                504, "timeout", f"generation still running; poll /v1/runs/{record.id}"
            ) from None
        if record.status is RunStatus.FAILED:
            code = "layout_stage" if record.error.startswith("layout") else "image_stage"
            status = 422 if code == "layout_stage" else 500
            raise api_error(status, code, record.error)
        return _record_json(record, store)

    # -- layout & dialog ---------------------------------------------------

    @app.post("/v1/layout")
    def make_layout(body: LayoutRequest):
        if not body.caption.strip():
            raise api_error(400, "bad_request", "caption must be non-empty")
        try:
            layout = layout_from_caption(
                body.caption, config.llm, backend=backend, template=template_for_language(body.language)
            )
        except LayoutStageError as exc:
            raise api_error(422, "layout_stage", str(exc)) from exc
        except LlmError as exc:
            raise api_error(502, "llm_unreachable", str(exc)) from exc
        return {"layout": layout_to_json(layout)}

    @app.post("/v1/sessions")
    def open_session(body: LayoutRequest):
        if not body.caption.strip():
            raise api_error(400, "bad_request", "caption must be non-empty")
        try:
            session = start_session(
                config.llm, template_for_language(body.language), body.caption, backend=backend
            )
        except LlmError as exc:
            raise api_error(502, "llm_unreachable", str(exc)) from exc
        app.state.sessions[session.id] = session
        return _session_json(session)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_json(_get_session(session_id))

    @app.post("/v1/sessions/{session_id}/turn")
    def take_turn(session_id: str, body: TurnRequest):
        if not body.instruction.strip():
            raise api_error(400, "bad_request", "instruction must be non-empty")
        with _session_lock(session_id):
            session = _get_session(session_id)
            try:
                session = dialog_turn(session, body.instruction, config.llm, backend=backend)
            except LlmError as exc:
                raise api_error(502, "llm_unreachable", str(exc)) from exc
            app.state.sessions[session_id] = session
        return _session_json(session)

    # -- generation --------------------------------------------------------

    @app.post("/v1/generate")
    def generate(body: GenerateRequest, request: Request):
        layout = _parse_body_layout(body.layout)
        gen_config = _gen_config(body.config)
        record = RunRecord(id=new_run_id(), caption=body.caption, config=body.config or {})
        store.save(record)
        wait = request.query_params.get("async", "").lower() not in ("true", "1", "yes")
        return _submit_or_wait(record, layout, gen_config, wait)

    @app.post("/v1/pipeline")
    def pipeline(body: PipelineRequest, request: Request):
        if not body.caption.strip():
            raise api_error(400, "bad_request", "caption must be non-empty")
        gen_config = _gen_config(body.config)
        try:
            layout = layout_from_caption(
                body.caption,
                config.llm,
                backend=backend,
                template=template_for_language(body.language),
                canvas=gen_config.canvas,
            )
        except (LayoutStageError, LlmError) as exc:
            raise api_error(422, "layout_stage", str(exc)) from exc
        record = RunRecord(id=new_run_id(), caption=body.caption, config=body.config or {})
        store.save(record)
        wait = request.query_params.get("async", "").lower() not in ("true", "1", "yes")
        return _submit_or_wait(record, layout, gen_config, wait)

    # -- runs ----------------------------------------------------------------

    @app.get("/v1/runs/{run_id}")
    def get_run(run_id: str):
        try:
            return _record_json(store.load(run_id), store)
        except RunNotFound as exc:
            raise api_error(404, "not_found", str(exc)) from exc

    @app.get("/v1/runs/{run_id}/image.png")
    def get_run_image(run_id: str):
        try:
            record = store.load(run_id)
        except RunNotFound as exc:
            raise api_error(404, "not_found", str(exc)) from exc
        path = store.run_dir(run_id) / "image.png"
        if not path.exists():
            raise api_error(404, "not_found", f"run {run_id} has no image (status {record.status.value})")
        return FileResponse(path, media_type="image/png")

    @app.get("/v1/runs/{run_id}/layout.svg")
    def get_run_svg(run_id: str):
        try:
            record = store.load(run_id)
        except RunNotFound as exc:
            raise api_error(404, "not_found", str(exc)) from exc
        if record.layout is None:
            raise api_error(404, "not_found", f"run {run_id} has no layout yet")
        return Response(render_layout_svg(record.layout), media_type="image/svg+xml")

    # -- benchmark -----------------------------------------------------------

    @app.post("/v1/benchmark/run")
    def benchmark(body: BenchmarkRequest):
        if body.kind == "all":
            kinds = list(bench.TaskKind)
        else:
            try:
                kinds = [bench.TaskKind(body.kind)]
            except ValueError:
                raise api_error(
                    400, "bad_request", f"kind must be one of all, "
                    f"{', '.join(k.value for k in bench.TaskKind)}"
                ) from None
        if not 1 <= body.n <= 1000:
            raise api_error(400, "bad_request", "n must be in [1, 1000]")
        if body.backend == "mock":
            tasks = [t for kind in kinds for t in bench.generate_tasks(kind, body.n, body.seed)]
            task_backend = bench.mock_for_tasks(tasks)
        elif body.backend == "live":
            task_backend = backend if backend is not None else HttpLlm(config.llm)
        else:
            raise api_error(400, "bad_request", "backend must be 'mock' or 'live'")
        report = bench.run_benchmark(
            task_backend,
            DEFAULT_TEMPLATE,
            kinds,
            body.n,
            body.seed,
            parallelism=config.parallelism,
        )
        return bench.report_to_json(report)

    return app


def serve(config: AppConfig | None = None) -> None:
    """Run the API under uvicorn; returns only when the server stops."""
    import uvicorn

    config = config or AppConfig.load()
    uvicorn.run(create_app(config), host=config.host, port=config.port)
