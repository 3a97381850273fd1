"""Socratic stage machine, session state, and deterministic prompt assembly."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .bandit import DEFAULT_ARMS, BanditState, StrategyArm, fresh_bandit
from .errors import InvalidProblem, RoleOrderViolation, SessionCompleted
from .kg import DEFAULT_FACT_CAP, DEFAULT_HOP_LIMIT


class Stage(str, Enum):
    PROBLEM_FRAMING = "ProblemFraming"
    GUIDED_QUESTIONING = "GuidedQuestioning"
    SEQUENTIAL_REASONING = "SequentialReasoning"
    ITERATIVE_FEEDBACK = "IterativeFeedback"
    EXPLORATORY_INQUIRY = "ExploratoryInquiry"
    CLOSURE = "Closure"


STAGE_CHAIN: tuple[Stage, ...] = (
    Stage.PROBLEM_FRAMING,
    Stage.GUIDED_QUESTIONING,
    Stage.SEQUENTIAL_REASONING,
    Stage.ITERATIVE_FEEDBACK,
    Stage.EXPLORATORY_INQUIRY,
    Stage.CLOSURE,
)

STAGE_GOALS: dict[Stage, str] = {
    Stage.PROBLEM_FRAMING: "Restate the problem together and pin down the known quantities.",
    Stage.GUIDED_QUESTIONING: "Ask targeted questions that lead the learner to name the unknowns and their relationships.",
    Stage.SEQUENTIAL_REASONING: "Work through the algebraic steps one at a time, letting the learner supply each step.",
    Stage.ITERATIVE_FEEDBACK: "Revisit the learner's last attempt, point at the gap, and ask a corrective question.",
    Stage.EXPLORATORY_INQUIRY: "Invite the learner to generalize: what would change if the legs were counted differently?",
    Stage.CLOSURE: "Have the learner summarize the method and confirm the final answer.",
}

INSTRUCTOR_ROLE_TEXT = (
    "You are a Socratic mathematics instructor. Guide the learner toward the "
    "solution step by step through questions. Never reveal the final answer "
    "outright, and always end your turn with a question."
)


class Role(str, Enum):
    INSTRUCTOR = "Instructor"
    LEARNER = "Learner"
    SYSTEM = "System"


class SystemConfig(str, Enum):
    NO_AGENT = "no_agent"
    AGENT_NO_KG = "agent_no_kg"
    AGENT_KG = "agent_kg"


@dataclass(frozen=True)
class EngineSettings:
    max_turns_per_stage: int = 4
    advance_threshold: float = 0.8
    remediate_threshold: float = 0.3
    history_window: int = 8
    hop_limit: int = DEFAULT_HOP_LIMIT
    fact_cap: int = DEFAULT_FACT_CAP


@dataclass(frozen=True)
class ProblemInstance:
    title: str
    statement: str
    heads: int
    legs: int
    knowledge_point_hints: tuple[str, ...] = ()

    def validate(self) -> None:
        if not self.statement:
            raise InvalidProblem("problem statement must be non-empty")
        for value, name in ((self.heads, "heads"), (self.legs, "legs")):
            if not isinstance(value, int) or isinstance(value, bool) or value < 0 or not math.isfinite(value):
                raise InvalidProblem(f"{name} must be a finite non-negative integer")

    @classmethod
    def from_dict(cls, raw: dict) -> "ProblemInstance":
        problem = cls(
            title=raw.get("title", ""),
            statement=raw.get("statement", ""),
            heads=raw.get("heads", 0),
            legs=raw.get("legs", 0),
            knowledge_point_hints=tuple(raw.get("knowledge_point_hints", [])),
        )
        problem.validate()
        return problem

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "statement": self.statement,
            "heads": self.heads,
            "legs": self.legs,
            "knowledge_point_hints": list(self.knowledge_point_hints),
        }


@dataclass(frozen=True)
class Turn:
    index: int
    role: Role
    text: str
    stage: Stage
    strategy_arm: str | None = None
    cited_facts: tuple[tuple[str, str, str], ...] = ()
    timestamp: int = 0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "role": self.role.value,
            "stage": self.stage.value,
            "strategy_arm": self.strategy_arm,
            "cited_facts": [list(fact) for fact in self.cited_facts],
            "text": self.text,
        }


class SessionStatus(str, Enum):
    ACTIVE = "Active"
    COMPLETED = "Completed"


_session_ids = itertools.count(1)


@dataclass
class DialogueSession:
    id: str
    config: SystemConfig
    problem: ProblemInstance
    settings: EngineSettings
    stage: Stage = Stage.PROBLEM_FRAMING
    transcript: list[Turn] = field(default_factory=list)
    bandit: BanditState = field(default_factory=fresh_bandit)
    stage_turn_count: int = 0
    status: SessionStatus = SessionStatus.ACTIVE
    in_remediation: bool = False
    remediation_return: Stage | None = None
    last_score: float = 0.0

    def last_turn(self, role: Role) -> Turn | None:
        for turn in reversed(self.transcript):
            if turn.role == role:
                return turn
        return None


def create_session(
    config: SystemConfig,
    problem: ProblemInstance,
    arms: tuple[StrategyArm, ...] = DEFAULT_ARMS,
    settings: EngineSettings | None = None,
    session_id: str | None = None,
) -> DialogueSession:
    """New Active session in ProblemFraming with one System turn stating the problem."""
    problem.validate()
    session = DialogueSession(
        id=session_id if session_id is not None else f"s{next(_session_ids)}",
        config=config,
        problem=problem,
        settings=settings or EngineSettings(),
        bandit=fresh_bandit(arms),
    )
    session.transcript.append(
        Turn(index=0, role=Role.SYSTEM, text=problem.statement, stage=Stage.PROBLEM_FRAMING)
    )
    return session


def append_turn(session: DialogueSession, turn: Turn) -> DialogueSession:
    """Append a turn, assigning its index; enforces role alternation."""
    if session.status is SessionStatus.COMPLETED:
        raise SessionCompleted(session.id)
    if turn.role is Role.SYSTEM:
        raise RoleOrderViolation("System turns only open a session")
    previous = session.transcript[-1]
    if previous.role is not Role.SYSTEM and turn.role == previous.role:
        raise RoleOrderViolation(f"{turn.role.value} may not follow {previous.role.value}")
    if turn.cited_facts and (session.config is not SystemConfig.AGENT_KG or turn.role is not Role.INSTRUCTOR):
        raise RoleOrderViolation("cited facts only appear on instructor turns in the KG configuration")
    index = len(session.transcript)
    session.transcript.append(replace(turn, index=index, timestamp=index))
    if turn.role is Role.INSTRUCTOR:
        session.stage_turn_count += 1
    return session


def _chain_successor(stage: Stage, skip_feedback: bool = False) -> Stage | None:
    """Next stage along the forward chain; None means the session completes."""
    position = STAGE_CHAIN.index(stage)
    for candidate in STAGE_CHAIN[position + 1 :]:
        if skip_feedback and candidate is Stage.ITERATIVE_FEEDBACK:
            continue
        return candidate
    return None


def _enter(session: DialogueSession, stage: Stage | None) -> Stage:
    if stage is None:
        session.status = SessionStatus.COMPLETED
        return session.stage
    session.stage = stage
    session.stage_turn_count = 0
    return stage


def advance_stage(session: DialogueSession, score: float) -> Stage:
    """Apply the threshold table to the session's current stage.

    High score or an exhausted per-stage turn budget advances to the successor
    (Closure completes the session); a middling score holds the stage; a low
    score detours into IterativeFeedback, which later resumes at the
    interrupted stage's successor. A remediation detour keeps the interrupted
    stage's turn count so the detour spends the remaining budget rather than a
    fresh one (this is what bounds total session length).
    """
    if session.status is SessionStatus.COMPLETED:
        raise SessionCompleted(session.id)
    cfg = session.settings
    if score >= cfg.advance_threshold or session.stage_turn_count >= cfg.max_turns_per_stage:
        if session.stage is Stage.ITERATIVE_FEEDBACK and session.in_remediation:
            target = session.remediation_return
            session.in_remediation = False
            session.remediation_return = None
        else:
            target = _chain_successor(session.stage)
        return _enter(session, target)
    if score >= cfg.remediate_threshold:
        return session.stage
    if session.stage is not Stage.ITERATIVE_FEEDBACK:
        session.in_remediation = True
        session.remediation_return = _chain_successor(session.stage, skip_feedback=True)
        session.stage = Stage.ITERATIVE_FEEDBACK  # turn count deliberately carried over
    return session.stage


def assemble_prompt(session: DialogueSession, context_text: str, directive_text: str) -> str:
    """Deterministic five-section prompt for one instructor turn."""
    if session.config is not SystemConfig.AGENT_KG:
        context_text = ""
    if session.config is SystemConfig.NO_AGENT:
        directive_text = ""
    history = session.transcript[-session.settings.history_window :]
    history_lines = "\n".join(f"{turn.role.value}: {turn.text}" for turn in history)
    sections = (
        f"[ROLE]\n{INSTRUCTOR_ROLE_TEXT}",
        f"[STAGE]\n{session.stage.value}: {STAGE_GOALS[session.stage]}",
        f"[STRATEGY]\n{directive_text}",
        f"[KNOWLEDGE]\n{context_text}",
        f"[HISTORY]\n{history_lines}",
    )
    return "\n".join(sections)


def transcript_to_jsonl(session: DialogueSession) -> str:
    """Line-delimited turn records, one JSON object per turn."""
    import json

    return "\n".join(json.dumps(turn.to_dict(), sort_keys=True) for turn in session.transcript)
