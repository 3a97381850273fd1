"""Role-based agents: one instructor turn end-to-end and the scripted learner.

The instructor pipeline per turn: link knowledge points, query the graph,
render facts, assemble the prompt, call the backend, and annotate the turn
with the facts it was grounded on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .backends import CompletionBackend, CompletionRequest, KeywordRule, ScriptedBackend
from .dialogue import (
    DialogueSession,
    Role,
    SessionStatus,
    SystemConfig,
    Turn,
    assemble_prompt,
)
from .errors import ScriptExhausted, SessionCompleted
from .kg import KnowledgeGraph, link_knowledge_points, query_context, render_facts


class AgentRole(str, Enum):
    INSTRUCTOR = "Instructor"
    LEARNER_SIM = "LearnerSim"
    EVALUATOR = "Evaluator"


PERSONAS: dict[AgentRole, str] = {
    AgentRole.INSTRUCTOR: (
        "You are the instructor agent in a Socratic tutoring dialogue. Follow the "
        "sections of the prompt exactly; never state the final answer and always "
        "end with a question."
    ),
    AgentRole.LEARNER_SIM: "You are a student working through a mathematics problem.",
    AgentRole.EVALUATOR: "You assess a student's latest attempt for correctness.",
}


def _retrieve(session: DialogueSession, graph: KnowledgeGraph):
    """Seeds = knowledge points linked in the last learner turn, then the
    problem's hint ids (those present in the graph)."""
    last_learner = session.last_turn(Role.LEARNER)
    seeds = link_knowledge_points(last_learner.text if last_learner else "", graph)
    for hint in session.problem.knowledge_point_hints:
        if hint in graph.nodes and hint not in seeds:
            seeds.append(hint)
    return query_context(
        graph, seeds, hop_limit=session.settings.hop_limit, cap=session.settings.fact_cap
    )


def instructor_step(
    session: DialogueSession,
    graph: KnowledgeGraph | None,
    backend: CompletionBackend,
    arm=None,
) -> Turn:
    """Produce (but do not append) the next instructor turn."""
    if session.status is SessionStatus.COMPLETED:
        raise SessionCompleted(session.id)
    if (graph is not None) != (session.config is SystemConfig.AGENT_KG):
        raise ValueError("a graph is required exactly when the session uses the KG configuration")

    context_text = ""
    cited: tuple[tuple[str, str, str], ...] = ()
    if session.config is SystemConfig.AGENT_KG:
        bundle = _retrieve(session, graph)
        context_text = render_facts(bundle)
        cited = tuple((f.subject, f.relation.value, f.object) for f in bundle.facts)

    use_strategy = session.config is not SystemConfig.NO_AGENT and arm is not None
    directive = arm.directive_text if use_strategy else ""
    prompt = assemble_prompt(session, context_text, directive)
    request = CompletionRequest(
        messages=(("system", PERSONAS[AgentRole.INSTRUCTOR]), ("user", prompt))
    )
    text = backend.complete(request)
    return Turn(
        index=len(session.transcript),
        role=Role.INSTRUCTOR,
        text=text,
        stage=session.stage,
        strategy_arm=arm.id if use_strategy else None,
        cited_facts=cited,
    )


class LearnerScript:
    """Ordered learner utterances with a per-session cursor."""

    def __init__(self, entries: list[str]):
        self.entries = list(entries)
        self.cursor = 0

    def next(self) -> str:
        if self.cursor >= len(self.entries):
            raise ScriptExhausted(f"learner script exhausted after {self.cursor} entries")
        entry = self.entries[self.cursor]
        self.cursor += 1
        return entry


def scripted_learner_step(script: LearnerScript, session: DialogueSession) -> Turn:
    """Produce (but do not append) the next scripted learner turn."""
    if session.status is SessionStatus.COMPLETED:
        raise SessionCompleted(session.id)
    return Turn(
        index=len(session.transcript),
        role=Role.LEARNER,
        text=script.next(),
        stage=session.stage,
    )


# Stage names appear verbatim in the [STAGE] prompt section, so keyword rules
# keyed on them give a coherent offline instructor for every configuration.
DEFAULT_INSTRUCTOR_RULES: tuple[KeywordRule, ...] = (
    KeywordRule("ProblemFraming", "Let's begin with what we know. How many heads and how many legs are there in total?"),
    KeywordRule("GuidedQuestioning", "If we call the chickens x and the rabbits y, what equation does the head count give us?"),
    KeywordRule("SequentialReasoning", "Good. Each chicken has 2 legs and each rabbit has 4. What equation does the leg count give us?"),
    KeywordRule("IterativeFeedback", "Let's look at that step again. If x + y equals the number of heads, what is y in terms of x?"),
    KeywordRule("ExploratoryInquiry", "Suppose every animal had exactly 3 legs instead. How would the equations change?"),
    KeywordRule("Closure", "Well done. Can you summarize how the two equations led you to the answer?"),
)


def default_scripted_backend() -> ScriptedBackend:
    return ScriptedBackend(rules=list(DEFAULT_INSTRUCTOR_RULES))
