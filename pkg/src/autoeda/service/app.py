"""HTTP facade: asynchronous job model plus session-scoped exploration.

Long-running work (context builds, question runs) is queued to a background
pool and the endpoint returns a job id immediately; clients poll
``GET /jobs/{id}``. Failure of a pipeline run is job data (state=failed or a
failed artifact inside the bundle), never an HTTP 5xx.
"""

from __future__ import annotations

import itertools
import logging
import threading
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import NoContext, UnknownArtifact
from ..pipeline import Workspace

log = logging.getLogger(__name__)


class DatasourceRequest(BaseModel):
    target: str
    name: str | None = None


class SessionRequest(BaseModel):
    datasource_id: str


class QuestionRequest(BaseModel):
    question: str


class FeedbackRequest(BaseModel):
    datasource_id: str
    artifact_id: str
    satisfied: bool


def create_app(
    workspace: Workspace,
    gateway_factory,
    workers: int = 2,
    max_pending: int = 32,
    api_key: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    from .jobs import JobManager

    app = FastAPI(title="autoeda", version="0.1.0")
    jobs = JobManager(workspace.root / "jobs", workers=workers, max_pending=max_pending)
    sessions: dict[str, dict] = {}
    session_lock = threading.Lock()
    session_seq = itertools.count(1)
    app.state.jobs = jobs

    def check_key(request: Request):
        if api_key is not None and request.headers.get("x-api-key") != api_key:
            raise HTTPException(status_code=401, detail="missing or wrong API key")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/datasources", status_code=202, dependencies=[Depends(check_key)])
    def bind_datasource(body: DatasourceRequest):
        if not body.target.strip():
            raise HTTPException(status_code=400, detail="target must be a connection URL or fixture path")

        def work(note):
            note("introspecting schema")
            ds = workspace.ingest(body.target, name=body.name)
            note("building data context")
            gateway = gateway_factory()
            workspace.build_hdc(ds, gateway)
            return ds.id, None

        try:
            job = jobs.submit("hdc_build", work)
        except RuntimeError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        return {"job_id": job.id}

    @app.get("/jobs/{job_id}", dependencies=[Depends(check_key)])
    def job_state(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="no such job")
        return job.to_dict()

    @app.get("/jobs/{job_id}/result", dependencies=[Depends(check_key)])
    def job_result(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="no such job")
        payload = jobs.result_payload(job_id)
        if payload is None:
            raise HTTPException(status_code=404, detail="job has no stored result")
        return payload

    @app.post("/sessions", status_code=201, dependencies=[Depends(check_key)])
    def open_session(body: SessionRequest):
        try:
            workspace.datasource(body.datasource_id)
        except NoContext:
            raise HTTPException(status_code=404, detail="unknown datasource")
        with session_lock:
            session_id = f"session-{next(session_seq):06d}"
            sessions[session_id] = {"id": session_id, "datasource_id": body.datasource_id, "history": []}
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}", dependencies=[Depends(check_key)])
    def session_state(session_id: str):
        with session_lock:
            session = sessions.get(session_id)
            if session is None:
                raise HTTPException(status_code=404, detail="no such session")
            return {
                "id": session["id"],
                "datasource_id": session["datasource_id"],
                "history": list(session["history"]),
            }

    @app.post("/sessions/{session_id}/questions", status_code=202, dependencies=[Depends(check_key)])
    def ask_question(session_id: str, body: QuestionRequest):
        with session_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="no such session")
        ds = workspace.datasource(session["datasource_id"])
        if not ds.hdc_ready():
            raise HTTPException(status_code=409, detail="data context not built yet")

        def work(note):
            note("running question pipeline")
            gateway = gateway_factory()
            bundle = workspace.ask(ds, gateway, body.question)
            with session_lock:
                session["history"].append(bundle)
            return ds.id, bundle

        try:
            job = jobs.submit("question_run", work)
        except RuntimeError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        return {"job_id": job.id}

    @app.get("/datasources/{ds_id}/suggestions", dependencies=[Depends(check_key)])
    def suggestions(ds_id: str):
        try:
            ds = workspace.datasource(ds_id)
            return workspace.suggestions(ds)
        except NoContext:
            raise HTTPException(status_code=404, detail="datasource or its context not found")

    @app.post("/feedback", dependencies=[Depends(check_key)])
    def feedback(body: FeedbackRequest):
        try:
            ds = workspace.datasource(body.datasource_id)
            engine = workspace.question_engine(ds, gateway_factory())
            engine.record_feedback(body.artifact_id, body.satisfied)
        except (NoContext, UnknownArtifact) as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"ok": True}

    if ui_dir and Path(ui_dir).exists():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
