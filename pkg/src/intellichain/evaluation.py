"""Ground-truth solver, learner scoring, and the three-configuration ablation."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .backends import CompletionBackend
from .bandit import StrategyArm, DEFAULT_ARMS, reward_from_signals, select_arm, update
from .dialogue import (
    DialogueSession,
    EngineSettings,
    ProblemInstance,
    Role,
    SessionStatus,
    Stage,
    SystemConfig,
    advance_stage,
    append_turn,
    create_session,
)
from .agents import LearnerScript, instructor_step, scripted_learner_step
from .errors import InfeasibleProblem
from .kg import KnowledgeGraph


def solve_heads_legs(heads: int, legs: int) -> tuple[int, int] | None:
    """Unique non-negative integer (chickens, rabbits) with the given head and
    leg totals, or None when infeasible."""
    if heads < 0 or legs < 0:
        raise ValueError("heads and legs must be non-negative")
    remainder = legs - 2 * heads
    if remainder < 0 or remainder % 2 != 0:
        return None
    rabbits = remainder // 2
    chickens = heads - rabbits
    if chickens < 0:
        return None
    return chickens, rabbits


class Verdict(str, Enum):
    CORRECT = "Correct"
    PARTIAL = "Partial"
    INCORRECT = "Incorrect"
    NO_ATTEMPT = "NoAttempt"


@dataclass(frozen=True)
class EvaluationSignal:
    score: float
    verdict: Verdict
    extracted_answer: tuple[int, int] | None = None

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "verdict": self.verdict.value,
            "extracted_answer": list(self.extracted_answer) if self.extracted_answer else None,
        }


_INTEGER = re.compile(r"\d+")
# Single-letter variable names are accepted so "x + y = 35" counts the same
# as "c + r = 35".
_HEADS_EQ = r"\b([a-z])\s*\+\s*([a-z])\s*=\s*{heads}\b"
_LEGS_EQ = r"\b2\s*\*?\s*([a-z])\s*\+\s*4\s*\*?\s*([a-z])\s*=\s*{legs}\b"


def _mentions_constraint(text: str, heads: int, legs: int) -> bool:
    lowered = text.lower()
    for pattern in (_HEADS_EQ.format(heads=heads), _LEGS_EQ.format(legs=legs)):
        match = re.search(pattern, lowered)
        if match and match.group(1) != match.group(2):
            return True
    return False


def evaluate_learner(turn_text: str, problem: ProblemInstance) -> EvaluationSignal:
    """Score a learner utterance against the solver's ground truth.

    The last two integers in the text are read positionally as (chickens,
    rabbits): both matching scores 1.0; one matching, or a correct constraint
    equation, scores 0.5; otherwise 0.0 (NoAttempt when no numbers appear).
    """
    solution = solve_heads_legs(problem.heads, problem.legs)
    if solution is None:
        raise InfeasibleProblem(f"no solution for heads={problem.heads}, legs={problem.legs}")
    integers = [int(m) for m in _INTEGER.findall(turn_text)]
    constraint = _mentions_constraint(turn_text, problem.heads, problem.legs)

    if len(integers) >= 2:
        candidate = (integers[-2], integers[-1])
        matches = (candidate[0] == solution[0]) + (candidate[1] == solution[1])
        if matches == 2:
            return EvaluationSignal(1.0, Verdict.CORRECT, candidate)
        if matches == 1 or constraint:
            return EvaluationSignal(0.5, Verdict.PARTIAL, candidate)
        return EvaluationSignal(0.0, Verdict.INCORRECT, candidate)
    if constraint:
        return EvaluationSignal(0.5, Verdict.PARTIAL, None)
    if integers:
        return EvaluationSignal(0.0, Verdict.INCORRECT, None)
    return EvaluationSignal(0.0, Verdict.NO_ATTEMPT, None)


@dataclass(frozen=True)
class ConfigurationMetrics:
    config: SystemConfig
    turn_count: int
    grounding_coverage: float
    question_ratio: float
    stage_coverage: tuple[str, ...]
    completed: bool

    def to_dict(self) -> dict:
        return {
            "config": self.config.value,
            "turn_count": self.turn_count,
            "grounding_coverage": self.grounding_coverage,
            "question_ratio": self.question_ratio,
            "stage_coverage": list(self.stage_coverage),
            "completed": self.completed,
        }


@dataclass(frozen=True)
class AblationReport:
    records: tuple[ConfigurationMetrics, ...]

    def record(self, config: SystemConfig) -> ConfigurationMetrics:
        for metrics in self.records:
            if metrics.config is config:
                return metrics
        raise KeyError(config)

    def to_dict(self) -> dict:
        return {"records": [m.to_dict() for m in self.records]}


def compute_metrics(session: DialogueSession) -> ConfigurationMetrics:
    instructor_turns = [t for t in session.transcript if t.role is Role.INSTRUCTOR]
    total = len(instructor_turns)
    grounded = sum(1 for t in instructor_turns if t.cited_facts)
    questions = sum(1 for t in instructor_turns if t.text.rstrip().endswith("?"))
    stage_order = [s.value for s in Stage]
    visited = {t.stage.value for t in session.transcript}
    return ConfigurationMetrics(
        config=session.config,
        turn_count=len(session.transcript),
        grounding_coverage=grounded / total if total else 0.0,
        question_ratio=questions / total if total else 0.0,
        stage_coverage=tuple(s for s in stage_order if s in visited),
        completed=session.status is SessionStatus.COMPLETED,
    )


def run_session_to_completion(
    config: SystemConfig,
    problem: ProblemInstance,
    graph: KnowledgeGraph | None,
    backend: CompletionBackend,
    learner_script: LearnerScript,
    arm_set: tuple[StrategyArm, ...] = DEFAULT_ARMS,
    settings: EngineSettings | None = None,
) -> tuple[DialogueSession, list[EvaluationSignal]]:
    """Loop instructor -> scripted learner -> evaluate -> bandit update ->
    stage advance until the session completes."""
    session = create_session(config, problem, arms=arm_set, settings=settings)
    session_graph = graph if config is SystemConfig.AGENT_KG else None
    signals: list[EvaluationSignal] = []
    previous_score = 0.0
    while session.status is SessionStatus.ACTIVE:
        arm = None
        if config is not SystemConfig.NO_AGENT:
            arm = session.bandit.arm(select_arm(session.bandit))
        turn = instructor_step(session, session_graph, backend, arm)
        append_turn(session, turn)
        learner_turn = scripted_learner_step(learner_script, session)
        append_turn(session, learner_turn)
        signal = evaluate_learner(learner_turn.text, problem)
        signals.append(signal)
        if arm is not None:
            update(session.bandit, arm.id, reward_from_signals(previous_score, signal.score))
        previous_score = signal.score
        advance_stage(session, signal.score)
    return session, signals


def run_ablation(
    problem: ProblemInstance,
    graph: KnowledgeGraph,
    backend: CompletionBackend,
    learner_script_entries: list[str],
    arm_set: tuple[StrategyArm, ...] = DEFAULT_ARMS,
    settings: EngineSettings | None = None,
) -> tuple[AblationReport, dict[SystemConfig, DialogueSession]]:
    """Run all three configurations with identical inputs and report metrics."""
    sessions: dict[SystemConfig, DialogueSession] = {}
    records = []
    for config in (SystemConfig.NO_AGENT, SystemConfig.AGENT_NO_KG, SystemConfig.AGENT_KG):
        session, _ = run_session_to_completion(
            config,
            problem,
            graph,
            backend,
            LearnerScript(learner_script_entries),
            arm_set=arm_set,
            settings=settings,
        )
        sessions[config] = session
        records.append(compute_metrics(session))
    return AblationReport(records=tuple(records)), sessions
