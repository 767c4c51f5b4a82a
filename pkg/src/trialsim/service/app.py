"""HTTP facade: submit studies as cancellable jobs, poll progress, fetch
results, and serve the web UI's static files from the same process."""

from __future__ import annotations

import io
import os
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from ..configio import (
    merror_config_from_dict,
    power_config_from_dict,
    synth_spec_from_dict,
)
from ..merror import parse_csv, run_merror_study, synth_dataset, validate_merror_config
from ..power_engine import run_power_study
from ..reporting import merror_document, plot_series, power_document, results_csv_text
from ..sampling import TAG_SYNTH_DATA, StreamKey, derive_stream
from ..trial import ConfigValidationError, ValidationIssue, validate_config
from ..version import ENGINE_VERSION
from .jobs import STATE_DONE, JobManager, QueueFull, UnknownJob
from .schemas import (
    JobStatusResponse,
    SubmitRequest,
    SubmitResponse,
    ValidationErrorResponse,
    ValidationIssueModel,
)

API_PREFIX = "/api/v1"

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>trialsim</title></head>
<body>
<h1>trialsim service</h1>
<p>The API lives under <code>/api/v1</code>. The web UI has not been built;
see the README for build instructions.</p>
</body></html>
"""


def _validation_response(issues) -> JSONResponse:
    body = ValidationErrorResponse(
        errors=[ValidationIssueModel(path=i.path, message=i.message) for i in issues]
    )
    return JSONResponse(status_code=422, content=body.model_dump())


def _job_status(job) -> JobStatusResponse:
    return JobStatusResponse(
        id=job.id,
        kind=job.kind,
        state=job.state,
        progress=job.progress,
        submitted_at=job.submitted_at,
        started_at=job.started_at,
        finished_at=job.finished_at,
        error=job.error,
        results_url=f"{API_PREFIX}/simulations/{job.id}/results" if job.state == STATE_DONE else None,
    )


def _build_power_runner(body: SubmitRequest, workers: Optional[int]):
    config = validate_config(power_config_from_dict(body.config))

    def runner(progress_sink, cancel):
        results = run_power_study(config, progress_sink=progress_sink, workers=workers, cancel=cancel)
        return power_document(results)

    return runner


def _build_merror_runner(body: SubmitRequest, workers: Optional[int]):
    roles, config = merror_config_from_dict(body.config)
    dropped = 0
    if body.data_csv is not None:
        try:
            dataset, dropped = parse_csv(io.StringIO(body.data_csv), roles, source="data_csv")
        except ValueError as exc:
            raise ConfigValidationError([ValidationIssue("data_csv", str(exc))]) from exc
    elif body.synthetic is not None:
        spec = synth_spec_from_dict(body.synthetic)
        try:
            dataset = synth_dataset(spec, derive_stream(StreamKey(config.seed, 0, TAG_SYNTH_DATA)))
        except ValueError as exc:
            raise ConfigValidationError([ValidationIssue("synthetic", str(exc))]) from exc
    else:
        raise ConfigValidationError(
            [ValidationIssue("data_csv", "merror submissions need either data_csv or synthetic")]
        )
    config = validate_merror_config(config, dataset.roles)

    def runner(progress_sink, cancel):
        results = run_merror_study(
            dataset, config, progress_sink=progress_sink, workers=workers, cancel=cancel, dropped_rows=dropped
        )
        return merror_document(results)

    return runner


def create_app(
    queue_limit: Optional[int] = None,
    history_limit: Optional[int] = None,
    workers: Optional[int] = None,
    static_dir: Optional[str] = None,
) -> FastAPI:
    if queue_limit is None:
        queue_limit = int(os.environ.get("TRIALSIM_QUEUE_LIMIT", "8"))
    if history_limit is None:
        history_limit = int(os.environ.get("TRIALSIM_HISTORY_LIMIT", "100"))
    if workers is None:
        env_workers = os.environ.get("TRIALSIM_WORKERS")
        workers = int(env_workers) if env_workers else None
    if static_dir is None:
        static_dir = os.environ.get("TRIALSIM_STATIC_DIR") or _default_static_dir()

    manager = JobManager(queue_limit=queue_limit, history_limit=history_limit)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        manager.shutdown()

    app = FastAPI(title="trialsim", version=ENGINE_VERSION, lifespan=lifespan)
    app.state.jobs = manager

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(ConfigValidationError)
    async def invalid_config(request: Request, exc: ConfigValidationError):
        return _validation_response(exc.issues)

    @app.post(f"{API_PREFIX}/simulations", response_model=SubmitResponse, status_code=202)
    def submit(body: SubmitRequest, response: Response):
        if body.kind == "power":
            runner = _build_power_runner(body, workers)
        else:
            runner = _build_merror_runner(body, workers)
        try:
            job = manager.submit(body.kind, runner)
        except QueueFull as exc:
            return JSONResponse(status_code=429, content={"detail": str(exc)})
        return SubmitResponse(id=job.id, status_url=f"{API_PREFIX}/simulations/{job.id}")

    @app.get(f"{API_PREFIX}/simulations/{{job_id}}", response_model=JobStatusResponse)
    def status(job_id: str):
        try:
            job = manager.get(job_id)
        except UnknownJob:
            return JSONResponse(status_code=404, content={"detail": f"unknown job {job_id}"})
        return _job_status(job)

    @app.get(f"{API_PREFIX}/simulations/{{job_id}}/results")
    def results(job_id: str, request: Request, format: Optional[str] = None):
        try:
            job = manager.get(job_id)
        except UnknownJob:
            return JSONResponse(status_code=404, content={"detail": f"unknown job {job_id}"})
        if job.state != STATE_DONE:
            return JSONResponse(
                status_code=409, content={"detail": f"results not ready: job is {job.state}"}
            )
        accept = request.headers.get("accept", "")
        want_csv = format == "csv" or ("text/csv" in accept and format != "structured")
        if want_csv:
            return Response(content=results_csv_text(job.document), media_type="text/csv")
        return Response(content=job.document.to_json(), media_type="application/json")

    @app.get(f"{API_PREFIX}/simulations/{{job_id}}/plot")
    def plot(job_id: str, metric: str = "power"):
        try:
            job = manager.get(job_id)
        except UnknownJob:
            return JSONResponse(status_code=404, content={"detail": f"unknown job {job_id}"})
        if job.state != STATE_DONE:
            return JSONResponse(
                status_code=409, content={"detail": f"results not ready: job is {job.state}"}
            )
        return plot_series(job.document, metric=metric) if job.kind == "power" else plot_series(job.document)

    @app.delete(f"{API_PREFIX}/simulations/{{job_id}}", response_model=JobStatusResponse)
    def cancel(job_id: str):
        try:
            job = manager.cancel(job_id)
        except UnknownJob:
            return JSONResponse(status_code=404, content={"detail": f"unknown job {job_id}"})
        return _job_status(job)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def placeholder():
            return _PLACEHOLDER_PAGE

    return app


def _default_static_dir() -> Optional[str]:
    # repo layout: src/trialsim/service/app.py -> repo root / frontend / dist
    root = Path(__file__).resolve().parents[3]
    candidate = root / "frontend" / "dist"
    if candidate.is_dir():
        return str(candidate)
    return None
