"""IntelliChain: knowledge-graph-grounded Socratic tutoring engine."""

from .backends import CompletionRequest, KeywordRule, RemoteBackend, ScriptedBackend
from .bandit import (
    DEFAULT_ARMS,
    BanditState,
    StrategyArm,
    fresh_bandit,
    reward_from_signals,
    select_arm,
    update,
)
from .dialogue import (
    DialogueSession,
    EngineSettings,
    ProblemInstance,
    Role,
    SessionStatus,
    Stage,
    SystemConfig,
    Turn,
    advance_stage,
    append_turn,
    assemble_prompt,
    create_session,
)
from .agents import (
    LearnerScript,
    default_scripted_backend,
    instructor_step,
    scripted_learner_step,
)
from .evaluation import (
    AblationReport,
    EvaluationSignal,
    Verdict,
    compute_metrics,
    evaluate_learner,
    run_ablation,
    run_session_to_completion,
    solve_heads_legs,
)
from .kg import (
    ContextBundle,
    KnowledgeEdge,
    KnowledgeGraph,
    KnowledgeNode,
    link_knowledge_points,
    load_graph,
    load_graph_file,
    normalize,
    query_context,
    render_facts,
    serialize_graph,
)

__version__ = "0.1.0"
