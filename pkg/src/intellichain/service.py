"""HTTP API over sessions, turns, and KG queries, with append-log persistence."""

from __future__ import annotations

import json
import os
import threading

from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .agents import instructor_step
from .bandit import BanditState, StrategyArm, reward_from_signals, select_arm, update
from .config import ServiceSettings, default_service_settings
from .dialogue import (
    DialogueSession,
    ProblemInstance,
    Role,
    SessionStatus,
    Stage,
    SystemConfig,
    Turn,
    advance_stage,
    append_turn,
    create_session,
)
from .errors import BackendFailure, InvalidProblem, SessionCompleted
from .evaluation import compute_metrics, evaluate_learner
from .kg import link_knowledge_points, query_context


def session_to_dict(session: DialogueSession) -> dict:
    return {
        "id": session.id,
        "config": session.config.value,
        "problem": session.problem.to_dict(),
        "stage": session.stage.value,
        "status": session.status.value,
        "stage_turn_count": session.stage_turn_count,
        "in_remediation": session.in_remediation,
        "remediation_return": session.remediation_return.value if session.remediation_return else None,
        "last_score": session.last_score,
        "turns": [turn.to_dict() for turn in session.transcript],
        "bandit": {
            "arms": [{"id": a.id, "directive_text": a.directive_text} for a in session.bandit.arms],
            "counts": list(session.bandit.counts),
            "sums": list(session.bandit.sums),
            "total_pulls": session.bandit.total_pulls,
        },
    }


def session_from_dict(raw: dict, settings: ServiceSettings) -> DialogueSession:
    bandit_raw = raw["bandit"]
    bandit = BanditState(
        arms=tuple(StrategyArm(a["id"], a["directive_text"]) for a in bandit_raw["arms"]),
        counts=list(bandit_raw["counts"]),
        sums=list(bandit_raw["sums"]),
        total_pulls=bandit_raw["total_pulls"],
    )
    transcript = [
        Turn(
            index=t["index"],
            role=Role(t["role"]),
            text=t["text"],
            stage=Stage(t["stage"]),
            strategy_arm=t.get("strategy_arm"),
            cited_facts=tuple(tuple(fact) for fact in t.get("cited_facts", [])),
            timestamp=t["index"],
        )
        for t in raw["turns"]
    ]
    session = DialogueSession(
        id=raw["id"],
        config=SystemConfig(raw["config"]),
        problem=ProblemInstance.from_dict(raw["problem"]),
        settings=settings.engine,
        stage=Stage(raw["stage"]),
        transcript=transcript,
        bandit=bandit,
        stage_turn_count=raw["stage_turn_count"],
        status=SessionStatus(raw["status"]),
        in_remediation=raw.get("in_remediation", False),
        remediation_return=Stage(raw["remediation_return"]) if raw.get("remediation_return") else None,
        last_score=raw.get("last_score", 0.0),
    )
    return session


class SessionStore:
    """In-memory sessions with an append-only snapshot log for durability.

    Every mutation appends a full session snapshot; startup replays the log,
    keeping the newest snapshot per session id.
    """

    def __init__(self, settings: ServiceSettings):
        self._settings = settings
        self._sessions: dict[str, DialogueSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._store_lock = threading.Lock()
        self._counter = 0
        self._log_path = settings.session_log
        if self._log_path and os.path.exists(self._log_path):
            self._replay()

    def _replay(self) -> None:
        with open(self._log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                raw = json.loads(line)
                session = session_from_dict(raw, self._settings)
                self._sessions[session.id] = session
                self._locks[session.id] = threading.Lock()
                if session.id.startswith("s") and session.id[1:].isdigit():
                    self._counter = max(self._counter, int(session.id[1:]))

    def persist(self, session: DialogueSession) -> None:
        if not self._log_path:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(session_to_dict(session), sort_keys=True) + "\n")

    def new_id(self) -> str:
        with self._store_lock:
            self._counter += 1
            return f"s{self._counter}"

    def add(self, session: DialogueSession) -> None:
        with self._store_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def get(self, session_id: str) -> DialogueSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session

    def lock(self, session_id: str) -> threading.Lock:
        return self._locks[session_id]


class CreateSessionRequest(BaseModel):
    config: str
    problem: str | dict = "chicken_rabbit"


class PostMessageRequest(BaseModel):
    text: str


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or default_service_settings()
    app = FastAPI(title="intellichain")
    store = SessionStore(settings)
    backend = settings.make_backend()
    app.state.store = store
    app.state.settings = settings

    def _resolve_problem(spec: str | dict) -> ProblemInstance:
        if isinstance(spec, dict):
            try:
                return ProblemInstance.from_dict(spec)
            except InvalidProblem as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        problem = settings.problems.get(spec)
        if problem is None:
            raise HTTPException(status_code=400, detail=f"unknown problem {spec!r}")
        return problem

    def _graph_for(session: DialogueSession):
        return settings.graph if session.config is SystemConfig.AGENT_KG else None

    def _select_arm(session: DialogueSession):
        if session.config is SystemConfig.NO_AGENT:
            return None
        return session.bandit.arm(select_arm(session.bandit))

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/problems")
    def problems():
        return {
            "problems": [
                {"id": name, "title": p.title, "statement": p.statement}
                for name, p in settings.problems.items()
            ]
        }

    @app.post("/api/sessions", status_code=201)
    def create_session_endpoint(request: CreateSessionRequest):
        try:
            config = SystemConfig(request.config)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown config {request.config!r}") from None
        problem = _resolve_problem(request.problem)
        session = create_session(
            config, problem, arms=settings.arms, settings=settings.engine,
            session_id=store.new_id(),
        )
        if config is not SystemConfig.NO_AGENT:
            arm = _select_arm(session)
            try:
                turn = instructor_step(session, _graph_for(session), backend, arm)
            except BackendFailure as exc:
                raise HTTPException(status_code=503, detail=str(exc)) from exc
            append_turn(session, turn)
        store.add(session)
        store.persist(session)
        return {
            "session_id": session.id,
            "stage": session.stage.value,
            "status": session.status.value,
            "turns": [t.to_dict() for t in session.transcript],
        }

    @app.post("/api/sessions/{session_id}/messages")
    def post_message_endpoint(session_id: str, request: PostMessageRequest):
        try:
            session = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}") from None
        with store.lock(session_id):
            if session.status is SessionStatus.COMPLETED:
                raise HTTPException(status_code=409, detail="session is completed")
            learner_turn = Turn(
                index=len(session.transcript),
                role=Role.LEARNER,
                text=request.text,
                stage=session.stage,
            )
            append_turn(session, learner_turn)
            signal = evaluate_learner(request.text, session.problem)
            if session.config is not SystemConfig.NO_AGENT:
                last_instructor = session.last_turn(Role.INSTRUCTOR)
                if last_instructor is not None and last_instructor.strategy_arm:
                    update(
                        session.bandit,
                        last_instructor.strategy_arm,
                        reward_from_signals(session.last_score, signal.score),
                    )
            session.last_score = signal.score
            advance_stage(session, signal.score)
            instructor_turn = None
            if session.status is SessionStatus.ACTIVE:
                arm = _select_arm(session)
                try:
                    turn = instructor_step(session, _graph_for(session), backend, arm)
                except BackendFailure as exc:
                    raise HTTPException(status_code=503, detail=str(exc)) from exc
                append_turn(session, turn)
                instructor_turn = session.transcript[-1].to_dict()
            store.persist(session)
            return {
                "turn": instructor_turn,
                "stage": session.stage.value,
                "status": session.status.value,
                "signal": signal.to_dict(),
            }

    @app.get("/api/sessions/{session_id}")
    def get_session_endpoint(session_id: str):
        try:
            session = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}") from None
        metrics = compute_metrics(session)
        return {
            "session_id": session.id,
            "config": session.config.value,
            "stage": session.stage.value,
            "status": session.status.value,
            "turns": [t.to_dict() for t in session.transcript],
            "metrics": metrics.to_dict(),
        }

    @app.get("/api/kg/query")
    def query_kg_endpoint(
        point: str = Query(...),
        hops: int = Query(default=settings.engine.hop_limit),
        cap: int = Query(default=settings.engine.fact_cap),
    ):
        if not point.strip():
            raise HTTPException(status_code=400, detail="point must be non-empty")
        seeds = link_knowledge_points(point, settings.graph)
        bundle = query_context(settings.graph, seeds, hop_limit=hops, cap=cap)
        return bundle.to_dict()

    if settings.static_dir and os.path.isdir(settings.static_dir):
        app.mount("/", StaticFiles(directory=settings.static_dir, html=True), name="ui")

    return app
