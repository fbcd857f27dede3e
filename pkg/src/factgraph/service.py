"""HTTP facade over the stores and the pipeline.

All state lives in an AppState; the app object itself is stateless and
cheap to build, which keeps tests honest (a fresh app over an existing
data directory must behave like a restarted service). Responses are
plain JSON dicts; shapes are frozen by the schema files shipped in
factgraph/schemas/.

Error mapping: invalid input 400, unknown ids 404, illegal review
transitions 409, content that cannot be extracted or media that cannot
be scored 422. When an api_token is configured, every endpoint except
/healthz and /ui requires it (Authorization: Bearer or X-API-Token).
"""

from __future__ import annotations

import datetime
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import AppConfig
from .errors import (
    CsvFormatError,
    ExtractorError,
    FactGraphError,
    MediaError,
    ParseError,
    ReviewError,
    ScoringError,
    TermError,
    TranscriptError,
)
from .kgstore import MediaId
from .pipeline import CONTENT_KINDS, extract_document
from .registry import MediaFilter, MediaItem, MediaKind
from .state import AppState
from .statements import ExtractorConfig


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=message)


def _parse_filter_params(
    title: Optional[str],
    topic: Optional[str],
    publisher: Optional[str],
    published_after: Optional[str],
    published_before: Optional[str],
    min_duration_seconds: Optional[int],
    max_duration_seconds: Optional[int],
    language: Optional[str],
    kind: Optional[str],
) -> MediaFilter:
    def _date(value, name):
        if value is None:
            return None
        try:
            return datetime.date.fromisoformat(value)
        except ValueError:
            raise _bad_request(f"{name}: expected YYYY-MM-DD, got {value!r}") from None

    try:
        media_kind = MediaKind.parse(kind) if kind else None
    except MediaError as exc:
        raise _bad_request(str(exc)) from exc
    return MediaFilter(
        title_contains=title,
        topic=topic,
        publisher=publisher,
        published_after=_date(published_after, "published_after"),
        published_before=_date(published_before, "published_before"),
        min_duration_seconds=min_duration_seconds,
        max_duration_seconds=max_duration_seconds,
        language=language,
        media_kind=media_kind,
    )


def _find_ui_dist() -> Optional[Path]:
    here = Path(__file__).resolve()
    candidates = [
        here.parents[2] / "frontend" / "dist",
        Path.cwd() / "frontend" / "dist",
    ]
    for candidate in candidates:
        if (candidate / "index.html").exists():
            return candidate
    return None


def create_app(
    config: Optional[AppConfig] = None, state: Optional[AppState] = None
) -> FastAPI:
    state = state or AppState(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.close()

    app = FastAPI(title="factgraph", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.appstate = state

    def guard(request: Request) -> None:
        token = state.config.api_token
        if not token:
            return
        supplied = request.headers.get("x-api-token")
        auth = request.headers.get("authorization", "")
        if auth.startswith("Bearer "):
            supplied = supplied or auth[len("Bearer ") :]
        if supplied != token:
            raise HTTPException(status_code=401, detail="missing or bad API token")

    protected = [Depends(guard)]

    @app.exception_handler(FactGraphError)
    async def _domain_error(request: Request, exc: FactGraphError):
        # fallback for domain errors the endpoints did not map themselves
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "triples": len(state.graph)}

    # -- ground truth -------------------------------------------------------

    @app.post("/ground-truth", dependencies=protected)
    def post_ground_truth(payload: dict) -> dict:
        fmt = payload.get("format", "csv")
        data = payload.get("data", "")
        if fmt not in ("csv", "nt"):
            raise _bad_request(f"format must be csv or nt, got {fmt!r}")
        if not isinstance(data, str) or not data.strip():
            raise _bad_request("data must be a non-empty string")
        try:
            return state.ingest_ground_truth(data, fmt, payload.get("source"))
        except (ParseError, CsvFormatError, TermError) as exc:
            raise _bad_request(str(exc)) from exc

    # -- media and jobs -------------------------------------------------------

    @app.post("/media", status_code=202, dependencies=protected)
    def post_media(payload: dict) -> dict:
        media = payload.get("media")
        if not isinstance(media, dict):
            raise _bad_request("media metadata object is required")
        try:
            item = MediaItem.from_dict(media)
        except MediaError as exc:
            raise _bad_request(str(exc)) from exc

        content = payload.get("content")
        if not isinstance(content, dict):
            raise _bad_request("content object is required")
        kind = content.get("kind", "plain")
        data = content.get("inline")
        if data is None and content.get("path"):
            try:
                data = Path(content["path"]).read_bytes()
            except OSError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        if data is None:
            raise _bad_request("content needs 'inline' text or a 'path'")

        extractor = payload.get("extractor", "rule")
        extractor_config = None
        if extractor == "llm":
            try:
                extractor_config = ExtractorConfig(**state.config.extractor)
            except (TypeError, ExtractorError) as exc:
                raise _bad_request(f"llm extractor not configured: {exc}") from exc
        elif extractor != "rule":
            raise _bad_request(f"extractor must be rule or llm, got {extractor!r}")

        if kind not in CONTENT_KINDS:
            raise HTTPException(
                status_code=422,
                detail=f"unknown content kind {kind!r}, expected one of "
                + ", ".join(CONTENT_KINDS),
            )
        try:
            doc = extract_document(
                item.id, data, kind, noise_filter=state.config.noise_filter
            )
        except (TranscriptError, FactGraphError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except UnicodeDecodeError as exc:
            raise HTTPException(
                status_code=422, detail=f"content is not valid UTF-8: {exc}"
            ) from exc

        state.register_media(item)
        job = state.submit_job(
            item.id,
            doc,
            trusted=bool(payload.get("trusted", False)),
            extractor=extractor,
            extractor_config=extractor_config,
            reproducibility_runs=int(payload.get("reproducibility_runs", 0)),
        )
        return {"job_id": job.job_id, "media_id": item.id}

    @app.get("/jobs/{job_id}", dependencies=protected)
    def get_job(job_id: str) -> dict:
        job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return job.to_dict()

    @app.get("/media/{media_id}/report", dependencies=protected)
    def get_report(media_id: MediaId) -> dict:
        try:
            return state.report_for(media_id).to_dict()
        except LookupError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ScoringError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    # -- statements and review -------------------------------------------------

    @app.get("/statements", dependencies=protected)
    def get_statements(
        media_id: Optional[str] = None,
        status: Optional[str] = None,
        page: int = Query(1, ge=1),
        page_size: Optional[int] = Query(None, ge=1, le=500),
    ) -> dict:
        try:
            return state.statements_page(media_id, status, page, page_size)
        except FactGraphError as exc:
            raise _bad_request(str(exc)) from exc

    @app.post("/statements/{statement_id}/review", dependencies=protected)
    def post_review(statement_id: str, payload: dict) -> dict:
        action = payload.get("action")
        if action not in ("Approve", "Reject", "Edit"):
            raise _bad_request(
                f"action must be Approve, Reject or Edit, got {action!r}"
            )
        try:
            record = state.review(
                statement_id,
                action,
                reviewer=str(payload.get("reviewer", "")),
                new_terms={
                    "subject": payload.get("subject", ""),
                    "predicate": payload.get("predicate", ""),
                    "object": payload.get("object", ""),
                }
                if action == "Edit"
                else None,
            )
        except LookupError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ReviewError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except (TermError, FactGraphError) as exc:
            raise _bad_request(str(exc)) from exc
        return record.to_dict()

    # -- search and stats --------------------------------------------------------

    @app.get("/search", dependencies=protected)
    def search(
        title: Optional[str] = None,
        topic: Optional[str] = None,
        publisher: Optional[str] = None,
        published_after: Optional[str] = None,
        published_before: Optional[str] = None,
        min_duration_seconds: Optional[int] = Query(None, ge=0),
        max_duration_seconds: Optional[int] = Query(None, ge=0),
        language: Optional[str] = None,
        kind: Optional[str] = None,
    ) -> dict:
        media_filter = _parse_filter_params(
            title,
            topic,
            publisher,
            published_after,
            published_before,
            min_duration_seconds,
            max_duration_seconds,
            language,
            kind,
        )
        try:
            hits = state.registry.filter(media_filter)
        except FactGraphError as exc:
            raise _bad_request(str(exc)) from exc
        return {"items": [item.to_dict() for item in hits], "total": len(hits)}

    @app.get("/graph/stats", dependencies=protected)
    def graph_stats() -> dict:
        return state.graph.stats()

    ui_dist = _find_ui_dist()
    if ui_dist is not None:
        app.mount("/ui", StaticFiles(directory=ui_dist, html=True), name="ui")

    return app


def main(config: Optional[AppConfig] = None) -> None:
    """Run the service under uvicorn (used by the CLI serve command)."""
    import uvicorn

    config = config or AppConfig()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
