"""Local HTTP API for the data-owner workflow.

Endpoints (JSON bodies unless noted):

* ``POST   /sessions``                    create a session; the server fixes its seed.
* ``POST   /sessions/{id}/data``          upload the private CSV (raw body or multipart).
* ``POST   /sessions/{id}/describe``      build a description (mode, privacy, overrides).
* ``POST   /sessions/{id}/generate``      sample synthetic rows (size, uniform attrs).
* ``GET    /sessions/{id}/report``        full comparison report.
* ``GET    /sessions/{id}/synthetic.csv`` the synthetic table.
* ``DELETE /sessions/{id}``               purge the session and its upload.

Every generate call reuses the session's server-assigned seed, so repeating
a request returns identical data: handing one session per recipient caps
what repeated queries can leak.  Uploads live in memory only and disappear
with the session.  Errors carry a machine-readable ``error`` code.
"""

from __future__ import annotations

import secrets
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .describer import DatasetDescription, Mode, PrivacyParams, describe
from .generator import GenerationRequest, generate
from .ingest import AttributeOverride, CsvFormatError, DataType, OverrideError, Table, load_csv_text
from .inspector import compare

DEFAULT_MAX_UPLOAD_BYTES = 64 * 1024 * 1024


@dataclass
class Session:
    """Per-recipient state; the seed never changes after creation."""

    id: str
    seed: int
    lock: threading.Lock = field(default_factory=threading.Lock)
    table: Table | None = None
    description: DatasetDescription | None = None
    synthetic: Table | None = None


class DescribeBody(BaseModel):
    mode: str = "independent"
    epsilon: float = 0.1
    histogram_size: int = Field(default=20, ge=1)
    categorical_threshold: int = Field(default=10, ge=1)
    k: int = Field(default=4, ge=1)
    overrides: list[dict] = Field(default_factory=list)


class GenerateBody(BaseModel):
    size: int | None = Field(default=None, ge=1)
    uniform_attributes: list[str] = Field(default_factory=list)
    inject_missing: bool = True


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def create_app(
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="tabsynth service", version="0.1.0")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> Session | None:
        with registry_lock:
            return sessions.get(session_id)

    # -- session lifecycle ---------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session() -> dict:
        session = Session(id=uuid.uuid4().hex, seed=secrets.randbits(63))
        with registry_lock:
            sessions[session.id] = session
        return {"session_id": session.id}

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str) -> Response:
        with registry_lock:
            if sessions.pop(session_id, None) is None:
                return _error(404, "unknown_session", session_id)
        return Response(status_code=204)

    # -- data upload ----------------------------------------------------------

    @app.post("/sessions/{session_id}/data")
    async def upload_data(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        declared = request.headers.get("content-length")
        if declared and int(declared) > max_upload_bytes:
            return _error(413, "upload_too_large", f"cap is {max_upload_bytes} bytes")
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                return _error(400, "bad_upload", "multipart upload needs a 'file' field")
            body = await upload.read()
        else:
            body = await request.body()
        if len(body) > max_upload_bytes:
            return _error(413, "upload_too_large", f"cap is {max_upload_bytes} bytes")
        if not session.lock.acquire(blocking=False):
            return _error(409, "busy", "another operation is in progress")
        try:
            try:
                table = load_csv_text(body.decode("utf-8"))
            except (CsvFormatError, UnicodeDecodeError) as exc:
                return _error(400, "bad_csv", str(exc))
            session.table = table
            session.description = None
            session.synthetic = None
            return {
                "row_count": table.row_count,
                "columns": [
                    {
                        "name": c.name,
                        "data_type": c.inferred_type.value,
                        "categorical": c.categorical,
                        "distinct_count": c.distinct_count,
                    }
                    for c in table.columns
                ],
            }
        finally:
            session.lock.release()

    # -- describe / generate ----------------------------------------------------

    @app.post("/sessions/{session_id}/describe")
    def describe_endpoint(session_id: str, body: DescribeBody):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        if session.table is None:
            return _error(409, "no_data", "upload a CSV before describing")
        if not session.lock.acquire(blocking=False):
            return _error(409, "busy", "another operation is in progress")
        try:
            try:
                mode = Mode.parse(body.mode)
                overrides = [
                    AttributeOverride(
                        name=o["name"],
                        data_type=DataType(o["data_type"]) if o.get("data_type") else None,
                        categorical=o.get("categorical"),
                    )
                    for o in body.overrides
                ]
                table = load_csv_text(
                    session.table.to_csv_text(),
                    overrides,
                    categorical_threshold=body.categorical_threshold,
                )
                privacy = PrivacyParams(
                    epsilon=body.epsilon,
                    histogram_size=body.histogram_size,
                    categorical_threshold=body.categorical_threshold,
                )
                description = describe(table, mode, privacy, session.seed, max_parents=body.k)
            except (ValueError, OverrideError, KeyError) as exc:
                return _error(400, "bad_request", str(exc))
            session.table = table
            session.description = description
            session.synthetic = None
            return description.to_json()
        finally:
            session.lock.release()

    @app.post("/sessions/{session_id}/generate")
    def generate_endpoint(session_id: str, body: GenerateBody):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        if session.description is None:
            return _error(409, "no_description", "describe the data before generating")
        if not session.lock.acquire(blocking=False):
            return _error(409, "busy", "another operation is in progress")
        try:
            try:
                request = GenerationRequest(
                    description=session.description,
                    size=body.size,
                    seed=session.seed,
                    uniform_attributes=frozenset(body.uniform_attributes),
                    inject_missing=body.inject_missing,
                )
                session.synthetic = generate(request)
            except ValueError as exc:
                return _error(400, "bad_request", str(exc))
            return {"row_count": session.synthetic.row_count}
        finally:
            session.lock.release()

    # -- inspection ---------------------------------------------------------------

    @app.get("/sessions/{session_id}/report")
    def report_endpoint(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        if session.synthetic is None or session.description is None or session.table is None:
            return _error(409, "no_synthetic", "generate synthetic data before requesting a report")
        report = compare(session.table, session.synthetic, session.description)
        return report.to_json()

    @app.get("/sessions/{session_id}/synthetic.csv")
    def synthetic_csv(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "unknown_session", session_id)
        if session.synthetic is None:
            return _error(409, "no_synthetic", "generate synthetic data first")
        return Response(content=session.synthetic.to_csv_text(), media_type="text/csv")

    # -- static web UI -------------------------------------------------------------

    bundle = Path(static_dir) if static_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if bundle.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=bundle, html=True), name="webui")

    return app
