"""HTTP service driving rating sessions for the browser UI.

The service owns all protocol state: clients only ever see an opaque
session resource (category, step count, current setup, done, result) and a
neutral clip URL. The bisection bounds and the SSIM of the clip under
review are never exposed, so raters cannot infer how close to the boundary
they are. Clips for every catalog setup are pre-encoded at study setup
time; this service only streams files.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import RelcompError, SessionError
from .profiles import SetupCatalog
from .quality import catalog_from_csv
from .study import (
    SessionStore,
    RatingSession,
    max_steps,
    record_verdict,
    results_to_csv,
    start_session,
)
from .timeline import RelevanceLevel

_MEDIA_TYPES = {
    ".mp4": "video/mp4",
    ".mkv": "video/x-matroska",
    ".webm": "video/webm",
    ".y4m": "application/octet-stream",
}


@dataclass
class CatalogSource:
    """One rated catalog: its ranked entries plus the pre-encoded clips."""

    catalog: SetupCatalog
    clips_dir: Path

    def clip_path(self, setup_number: int) -> Path:
        matches = sorted(self.clips_dir.glob(f"setup_{setup_number:03d}.*"))
        if not matches:
            raise SessionError(
                f"no pre-encoded clip for setup {setup_number} in {self.clips_dir}"
            )
        return matches[0]


@dataclass
class ServiceConfig:
    data_dir: Path
    catalogs: dict[str, CatalogSource]
    participants: list[str] = field(default_factory=list)
    static_dir: Path | None = None
    port: int = 8008

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        base = Path(path).resolve().parent

        def resolve(p: str) -> Path:
            q = Path(p)
            return q if q.is_absolute() else base / q

        catalogs = {}
        for cid, spec in doc.get("catalogs", {}).items():
            catalogs[cid] = CatalogSource(
                catalog=catalog_from_csv(
                    resolve(spec["catalog_csv"]).read_text(encoding="utf-8")
                ),
                clips_dir=resolve(spec["clips_dir"]),
            )
        static_dir = doc.get("static_dir")
        return cls(
            data_dir=resolve(doc["data_dir"]),
            catalogs=catalogs,
            participants=list(doc.get("participants", [])),
            static_dir=resolve(static_dir) if static_dir else None,
            port=int(doc.get("port", 8008)),
        )


class StartSessionBody(BaseModel):
    participant: str
    category: str
    catalog_id: str


class VerdictBody(BaseModel):
    acceptable: bool
    version: int


def _resource(session_id: str, session: RatingSession) -> dict:
    """Client-facing projection; never includes lo/hi or any SSIM."""
    return {
        "id": session_id,
        "participant": session.participant,
        "category": session.category.code,
        "catalog_id": session.catalog_id,
        "step": session.steps + (0 if session.done else 1),
        "max_steps": max_steps(session.catalog_size),
        "current_setup": session.current,
        "done": session.done,
        "result": session.result,
        "version": session.version,
        "clip_url": None if session.done else f"/sessions/{session_id}/clip",
    }


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="relcomp rating service")
    store = SessionStore(config.data_dir)
    verdict_lock = threading.Lock()

    def load_or_404(session_id: str) -> RatingSession:
        try:
            return store.load(session_id)
        except SessionError:
            raise HTTPException(status_code=404, detail="unknown session")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "catalogs": sorted(config.catalogs)}

    @app.post("/sessions", status_code=201)
    def create_session(body: StartSessionBody) -> dict:
        if config.participants and body.participant not in config.participants:
            raise HTTPException(status_code=403, detail="unknown participant token")
        if body.catalog_id not in config.catalogs:
            raise HTTPException(status_code=404, detail="unknown catalog")
        try:
            category = RelevanceLevel.from_code(body.category)
        except RelcompError:
            raise HTTPException(status_code=422, detail="bad category code")
        with verdict_lock:
            if store.find_open(body.participant, category):
                raise HTTPException(
                    status_code=409,
                    detail="participant already has an open session for this category",
                )
            catalog = config.catalogs[body.catalog_id].catalog
            try:
                session = start_session(
                    body.participant, category, catalog, catalog_id=body.catalog_id
                )
            except SessionError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            session_id = uuid.uuid4().hex[:12]
            store.save(session_id, session)
        return _resource(session_id, session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _resource(session_id, load_or_404(session_id))

    @app.post("/sessions/{session_id}/verdict")
    def post_verdict(session_id: str, body: VerdictBody) -> dict:
        with verdict_lock:
            session = load_or_404(session_id)
            if session.done:
                raise HTTPException(status_code=410, detail="session finished")
            if body.version != session.version:
                raise HTTPException(
                    status_code=409,
                    detail=f"version conflict: session is at {session.version}",
                )
            session = record_verdict(session, body.acceptable)
            store.save(session_id, session)
        return _resource(session_id, session)

    @app.get("/sessions/{session_id}/clip")
    def get_clip(session_id: str, request: Request) -> Response:
        session = load_or_404(session_id)
        if session.done or session.current is None:
            raise HTTPException(status_code=410, detail="session finished")
        source = config.catalogs.get(session.catalog_id)
        if source is None:
            raise HTTPException(status_code=404, detail="catalog gone")
        try:
            path = source.clip_path(session.current)
        except SessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return _file_response(path, request.headers.get("range"))

    @app.get("/results")
    def results(category: str | None = None) -> PlainTextResponse:
        sessions = [store.load(sid) for sid in store.ids()]
        if category is not None:
            try:
                wanted = RelevanceLevel.from_code(category)
            except RelcompError:
                raise HTTPException(status_code=422, detail="bad category code")
            sessions = [s for s in sessions if s.category is wanted]
        catalog_for = {cid: src.catalog for cid, src in config.catalogs.items()}
        return PlainTextResponse(
            results_to_csv(sessions, catalog_for), media_type="text/csv"
        )

    if config.static_dir and config.static_dir.is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def _file_response(path: Path, range_header: str | None) -> Response:
    """Whole-file 200 or single-range 206 response for media playback."""
    if not path.is_file():
        raise HTTPException(status_code=404, detail="clip file missing")
    media_type = _MEDIA_TYPES.get(path.suffix.lower(), "application/octet-stream")
    size = path.stat().st_size
    headers = {"Accept-Ranges": "bytes"}
    if not range_header:
        return Response(
            content=path.read_bytes(), media_type=media_type, headers=headers
        )
    unit, _, spec = range_header.partition("=")
    start_s, _, end_s = spec.partition("-")
    try:
        if unit.strip().lower() != "bytes" or "," in spec:
            raise ValueError
        start = int(start_s) if start_s else None
        end = int(end_s) if end_s else None
        if start is None:  # suffix form: bytes=-N
            if not end:
                raise ValueError
            start, end = max(size - end, 0), size - 1
        elif end is None or end >= size:
            end = size - 1
        if start > end or start >= size:
            raise ValueError
    except ValueError:
        return Response(
            status_code=416, headers={"Content-Range": f"bytes */{size}"}
        )
    with open(path, "rb") as fh:
        fh.seek(start)
        chunk = fh.read(end - start + 1)
    headers["Content-Range"] = f"bytes {start}-{end}/{size}"
    return Response(
        content=chunk, status_code=206, media_type=media_type, headers=headers
    )


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int | None = None) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port or config.port, log_level="warning")
