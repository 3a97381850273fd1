"""Bundled demo resources and the service configuration file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .agents import DEFAULT_INSTRUCTOR_RULES
from .backends import (
    CompletionBackend,
    KeywordRule,
    RemoteBackend,
    ScriptedBackend,
)
from .bandit import DEFAULT_ARMS, StrategyArm
from .dialogue import EngineSettings, ProblemInstance
from .errors import MalformedDocument
from .kg import KnowledgeGraph, load_graph


def _bundled_text(name: str) -> str:
    return resources.files("intellichain.data").joinpath(name).read_text(encoding="utf-8")


def load_demo_graph() -> KnowledgeGraph:
    return load_graph(_bundled_text("demo_graph.json"))


def demo_graph_json() -> str:
    return _bundled_text("demo_graph.json")


def load_demo_problem() -> ProblemInstance:
    return ProblemInstance.from_dict(json.loads(_bundled_text("chicken_rabbit.json")))


def load_demo_learner_entries() -> list[str]:
    return json.loads(_bundled_text("learner_script.json"))["entries"]


def load_learner_entries_file(path: str) -> list[str]:
    """Learner script file: either a JSON array or {"entries": [...]}."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    entries = doc.get("entries") if isinstance(doc, dict) else doc
    if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
        raise MalformedDocument(f"{path}: expected a list of utterance strings")
    return entries


def load_problem_file(path: str) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return ProblemInstance.from_dict(json.load(fh))


@dataclass
class ServiceSettings:
    """Everything the HTTP service and the tutor REPL need at startup."""

    graph: KnowledgeGraph
    problems: dict[str, ProblemInstance]
    arms: tuple[StrategyArm, ...] = DEFAULT_ARMS
    engine: EngineSettings = field(default_factory=EngineSettings)
    backend_spec: dict = field(default_factory=lambda: {"type": "scripted"})
    session_log: str | None = None
    static_dir: str | None = None

    def make_backend(self) -> CompletionBackend:
        kind = self.backend_spec.get("type", "scripted")
        if kind == "scripted":
            rules = [
                KeywordRule(r["keyword"], r["response"])
                for r in self.backend_spec.get("rules", [])
            ] or list(DEFAULT_INSTRUCTOR_RULES)
            script = self.backend_spec.get("script")
            if script is not None:
                return ScriptedBackend(script=script)
            return ScriptedBackend(rules=rules, default=self.backend_spec.get("default"))
        if kind == "remote":
            return RemoteBackend(
                model=self.backend_spec.get("model", "gpt-4o-mini"),
                base_url=self.backend_spec.get("base_url"),
                timeout=self.backend_spec.get("timeout", 30.0),
            )
        raise MalformedDocument(f"unknown backend type {kind!r}")


def default_service_settings() -> ServiceSettings:
    return ServiceSettings(
        graph=load_demo_graph(),
        problems={"chicken_rabbit": load_demo_problem()},
    )


def load_service_config(path: str) -> ServiceSettings:
    """Parse the JSON service configuration file.

    Recognized keys: graph (file path; omitted = bundled demo graph),
    problems (id -> problem object; omitted = bundled chicken-rabbit), arms,
    backend, thresholds/limits (max_turns_per_stage, advance_threshold,
    remediate_threshold, history_window, hop_limit, fact_cap), session_log,
    static_dir.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise MalformedDocument(f"{path}: configuration must be a JSON object")

    if "graph" in doc:
        with open(doc["graph"], encoding="utf-8") as fh:
            graph = load_graph(fh.read())
    else:
        graph = load_demo_graph()

    if "problems" in doc:
        problems = {
            name: ProblemInstance.from_dict(raw) for name, raw in doc["problems"].items()
        }
    else:
        problems = {"chicken_rabbit": load_demo_problem()}

    arms = DEFAULT_ARMS
    if "arms" in doc:
        arms = tuple(StrategyArm(a["id"], a["directive_text"]) for a in doc["arms"])

    defaults = EngineSettings()
    engine = EngineSettings(
        max_turns_per_stage=doc.get("max_turns_per_stage", defaults.max_turns_per_stage),
        advance_threshold=doc.get("advance_threshold", defaults.advance_threshold),
        remediate_threshold=doc.get("remediate_threshold", defaults.remediate_threshold),
        history_window=doc.get("history_window", defaults.history_window),
        hop_limit=doc.get("hop_limit", defaults.hop_limit),
        fact_cap=doc.get("fact_cap", defaults.fact_cap),
    )
    return ServiceSettings(
        graph=graph,
        problems=problems,
        arms=arms,
        engine=engine,
        backend_spec=doc.get("backend", {"type": "scripted"}),
        session_log=doc.get("session_log"),
        static_dir=doc.get("static_dir"),
    )
