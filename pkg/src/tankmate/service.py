"""Session-oriented JSON API over the consultation pipeline.

Sessions persist as append-only line-JSON event logs, one file per
session; replaying a log reproduces the session's tank state and
therefore (the pipeline being pure) its latest result, byte for byte.
Requests to one session serialize on its lock; different sessions run
concurrently against the shared immutable knowledge base.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .advisor import (
    DEFAULT_CONFIG,
    AdvisorConfig,
    ConsultationError,
    ConsultationResult,
    elimination_trace_target,
    run_consultation,
    whatif_add,
)
from .explain import ExplainError, explain
from .kb import KnowledgeBase, TankFieldError, load_kb, tank_from_dict
from .rulelang import RuleSet


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = field

    def body(self) -> dict:
        error = {"code": self.code, "message": self.message}
        if self.field:
            error["field"] = self.field
        return {"error": error}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


CONDITION_FIELDS = (
    "temperature_f",
    "ph",
    "hardness_dgh",
    "tank_size_gal",
    "has_hiding_places",
    "stocking_ratio",
)


@dataclass
class SessionState:
    id: str
    version: int = 0
    created: str = ""
    updated: str = ""
    conditions: dict | None = None
    residents: tuple[str, ...] = ()
    result: ConsultationResult | None = None
    lock: threading.RLock = dc_field(default_factory=threading.RLock, repr=False)

    def tank_dict(self) -> dict | None:
        if self.conditions is None:
            return None
        return {**self.conditions, "residents": list(self.residents)}

    def view(self) -> dict:
        return {
            "id": self.id,
            "version": self.version,
            "created": self.created,
            "updated": self.updated,
            "conditions": self.conditions,
            "residents": list(self.residents),
            "result": self.result.to_dict() if self.result else None,
        }


class SessionStore:
    """In-memory sessions backed by per-session event-log files."""

    def __init__(
        self,
        data_dir: str | Path,
        kb: KnowledgeBase,
        rules: RuleSet | None,
        threshold: float,
        config: AdvisorConfig = DEFAULT_CONFIG,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.kb = kb
        self.rules = rules
        self.threshold = threshold
        self.config = config
        self.sessions: dict[str, SessionState] = {}
        self._registry_lock = threading.Lock()
        self._load_existing()

    # -- persistence --

    def _log_path(self, sid: str) -> Path:
        return self.data_dir / f"{sid}.jsonl"

    def _load_existing(self) -> None:
        for path in sorted(self.data_dir.glob("*.jsonl")):
            sid = path.stem
            session = SessionState(id=sid)
            for line in path.read_text(encoding="utf-8").splitlines():
                record = json.loads(line)
                self._apply(session, record["kind"], record["data"])
                session.version = record["version"]
                session.updated = record["at"]
                if not session.created:
                    session.created = record["at"]
            self._recompute(session)
            self.sessions[sid] = session

    def _append(self, session: SessionState, kind: str, data: dict) -> None:
        """Apply an event and make it durable; caller holds the session lock."""
        self._apply(session, kind, data)
        self._recompute(session)
        session.version += 1
        at = _now()
        if not session.created:
            session.created = at
        session.updated = at
        record = {"version": session.version, "at": at, "kind": kind, "data": data}
        with self._log_path(session.id).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    # -- event semantics (replayed verbatim at startup) --

    def _apply(self, session: SessionState, kind: str, data: dict) -> None:
        if kind == "created":
            return
        if kind == "conditions-set":
            session.conditions = dict(data)
        elif kind == "resident-added":
            species = data["species"]
            if species not in session.residents:
                session.residents = session.residents + (species,)
        elif kind == "resident-removed":
            residents = list(session.residents)
            residents.remove(data["species"])
            session.residents = tuple(residents)
        elif kind == "whatif-committed":
            species = data["species"]
            if species not in session.residents:
                session.residents = session.residents + (species,)
            if session.conditions is not None:
                gal = session.conditions["tank_size_gal"]
                session.conditions = {
                    **session.conditions,
                    "stocking_ratio": session.conditions.get("stocking_ratio", 0.0)
                    + 1.0 / gal,
                }
        else:  # pragma: no cover - log corruption guard
            raise ValueError(f"unknown event kind {kind!r}")

    def _recompute(self, session: SessionState) -> None:
        tank_data = session.tank_dict()
        if tank_data is None:
            session.result = None
            return
        tank = tank_from_dict(tank_data)
        session.result = run_consultation(
            tank, self.kb, rules=self.rules, threshold=self.threshold, config=self.config
        )

    # -- operations --

    def create(self) -> SessionState:
        with self._registry_lock:
            sid = secrets.token_hex(8)
            while sid in self.sessions:
                sid = secrets.token_hex(8)
            session = SessionState(id=sid)
            self.sessions[sid] = session
        with session.lock:
            self._append(session, "created", {})
        return session

    def get(self, sid: str) -> SessionState:
        session = self.sessions.get(sid)
        if session is None:
            raise ApiError(404, "unknown-session", f"no session {sid!r}")
        return session


def _parse_threshold(raw: str | None, default: float) -> float:
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ApiError(422, "invalid-field", f"threshold is not a number: {raw!r}",
                       field="threshold") from None
    if not 0.0 <= value <= 1.0:
        raise ApiError(422, "invalid-field", "threshold out of range [0, 1]",
                       field="threshold")
    return value


def _parse_flag(raw: str | None) -> bool:
    if raw is None:
        return False
    lowered = raw.lower()
    if lowered in ("1", "true", "yes"):
        return True
    if lowered in ("0", "false", "no", ""):
        return False
    raise ApiError(422, "invalid-field", f"not a boolean: {raw!r}", field="commit")


def _conditions_from_body(body: object) -> dict:
    if not isinstance(body, dict):
        raise ApiError(422, "invalid-body", "conditions must be a JSON object")
    unknown = set(body) - set(CONDITION_FIELDS)
    if unknown:
        field = sorted(unknown)[0]
        raise ApiError(422, "invalid-field", f"unknown field {field}", field=field)
    data = {name: body[name] for name in CONDITION_FIELDS if name in body}
    try:
        tank_from_dict({**data, "residents": []})
    except TankFieldError as exc:
        raise ApiError(422, "invalid-field", str(exc), field=exc.field) from None
    data.setdefault("has_hiding_places", False)
    data.setdefault("stocking_ratio", 0.0)
    return data


def _species_from_body(body: object) -> str:
    if not isinstance(body, dict) or not isinstance(body.get("species"), str):
        raise ApiError(422, "invalid-field", "body needs a species id string",
                       field="species")
    return body["species"]


def create_app(
    kb: KnowledgeBase | None = None,
    rules: RuleSet | None = None,
    data_dir: str | Path = "tankmate-data",
    threshold: float | None = None,
    config: AdvisorConfig = DEFAULT_CONFIG,
) -> FastAPI:
    """Build the service; the KB is loaded once and shared read-only."""
    kb = kb or load_kb()
    store = SessionStore(
        data_dir=data_dir,
        kb=kb,
        rules=rules,
        threshold=config.default_threshold if threshold is None else threshold,
        config=config,
    )
    app = FastAPI(title="tankmate", version="0.1.0")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "invalid-body", "message": str(exc.errors()[:1])}},
        )

    @app.post("/v1/sessions", status_code=201)
    def create_session():
        session = store.create()
        return {"id": session.id}

    @app.get("/v1/sessions/{sid}")
    def get_session(sid: str):
        session = store.get(sid)
        with session.lock:
            return session.view()

    @app.put("/v1/sessions/{sid}/conditions")
    def set_conditions(sid: str, body: dict = Body(...)):
        session = store.get(sid)
        data = _conditions_from_body(body)
        with session.lock:
            store._append(session, "conditions-set", data)
            return session.result.to_dict()

    @app.post("/v1/sessions/{sid}/residents")
    def add_resident(sid: str, body: dict = Body(...)):
        session = store.get(sid)
        species = _species_from_body(body)
        with session.lock:
            store._append(session, "resident-added", {"species": species})
            return session.view()

    @app.delete("/v1/sessions/{sid}/residents/{species}")
    def remove_resident(sid: str, species: str):
        session = store.get(sid)
        with session.lock:
            if species not in session.residents:
                raise ApiError(409, "not-a-resident", f"{species!r} is not a resident")
            store._append(session, "resident-removed", {"species": species})
            return session.view()

    @app.get("/v1/sessions/{sid}/suggestions")
    def get_suggestions(sid: str, threshold: str | None = None):
        session = store.get(sid)
        value = _parse_threshold(threshold, store.threshold)
        with session.lock:
            if session.conditions is None:
                raise ApiError(409, "conditions-required",
                               "set tank conditions before asking for suggestions")
            if value == store.threshold:
                result = session.result
            else:
                tank = tank_from_dict(session.tank_dict())
                result = run_consultation(
                    tank, store.kb, rules=store.rules, threshold=value,
                    config=store.config,
                )
            return {
                "threshold": value,
                "groups": [g.to_dict() for g in result.groups],
            }

    @app.post("/v1/sessions/{sid}/whatif")
    def whatif(sid: str, body: dict = Body(...), commit: str | None = None):
        session = store.get(sid)
        species = _species_from_body(body)
        do_commit = _parse_flag(commit)
        with session.lock:
            if session.conditions is None:
                raise ApiError(409, "conditions-required",
                               "set tank conditions before exploring what-ifs")
            tank = tank_from_dict(session.tank_dict())
            try:
                updated = whatif_add(
                    session.result, tank, store.kb, species,
                    rules=store.rules, config=store.config,
                )
            except ConsultationError as exc:
                raise ApiError(409, "not-a-candidate", str(exc)) from None
            committed_name = store.kb.profiles.get(species).name
            before = set(session.result.candidate_names()) - {committed_name}
            removed = sorted(before - set(updated.candidate_names()))
            if do_commit:
                store._append(session, "whatif-committed", {"species": species})
            return {
                "species": species,
                "committed": do_commit,
                "groups": [g.to_dict() for g in updated.groups],
                "removed_candidates": removed,
            }

    @app.get("/v1/sessions/{sid}/explanations")
    def get_explanations(sid: str, target: str = ""):
        session = store.get(sid)
        with session.lock:
            if not target or session.result is None:
                raise ApiError(404, "unknown-target", "no such target in the session trace")
            resolved = _resolve_target(session.result, target)
            try:
                tree = explain(session.result.trace, resolved)
            except ExplainError as exc:
                raise ApiError(404, "unknown-target", str(exc)) from None
            return tree.to_dict()

    @app.get("/v1/species")
    def list_species():
        return {
            "species": [
                {
                    "id": p.id,
                    "name": p.name,
                    "family": p.family,
                    "life_span_years": p.life_span_years,
                    "min_tank_gal": p.min_tank_gal,
                    "temp_min_f": p.temp_min_f,
                    "temp_max_f": p.temp_max_f,
                    "ph_min": p.ph_min,
                    "ph_max": p.ph_max,
                    "hardness_min_dgh": p.hardness_min_dgh,
                    "hardness_max_dgh": p.hardness_max_dgh,
                }
                for p in store.kb.profiles
            ]
        }

    return app


def _resolve_target(result: ConsultationResult, target: str) -> str | int:
    """Map service-level targets onto trace targets."""
    if target.startswith("elimination:"):
        species = target.split(":", 1)[1]
        resolved = elimination_trace_target(result.trace, species)
        if resolved is None:
            raise ApiError(404, "unknown-target",
                           f"no elimination of {species!r} in the trace")
        return resolved
    return target
