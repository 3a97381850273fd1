"""Terminal entry points: graph validation/query, interactive tutoring,
the ablation run, and the HTTP service."""

from __future__ import annotations

import json
import os
import sys

import click

from .backends import API_KEY_ENV, BASE_URL_ENV, RemoteBackend
from .bandit import reward_from_signals, select_arm, update
from .agents import default_scripted_backend, instructor_step
from .config import (
    default_service_settings,
    load_demo_learner_entries,
    load_learner_entries_file,
    load_problem_file,
    load_service_config,
)
from .dialogue import (
    Role,
    SessionStatus,
    SystemConfig,
    Turn,
    advance_stage,
    append_turn,
    create_session,
    transcript_to_jsonl,
)
from .errors import IntelliChainError
from .evaluation import evaluate_learner, run_ablation
from .kg import link_knowledge_points, load_graph_file, query_context


def report_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


@click.group()
def main():
    """IntelliChain: knowledge-graph-grounded Socratic tutoring."""


@main.group()
def kg():
    """Knowledge graph utilities."""


@kg.command("validate")
@click.argument("file", type=click.Path())
def kg_validate(file):
    """Validate a knowledge graph document."""
    try:
        graph = load_graph_file(file)
    except OSError as exc:
        raise click.ClickException(f"cannot read {file}: {exc}")
    except IntelliChainError as exc:
        raise click.ClickException(f"{file}: {exc}")
    click.echo(f"OK: {len(graph.nodes)} nodes, {len(graph.edges)} edges")


@kg.command("query")
@click.argument("file", type=click.Path())
@click.option("--point", required=True, help="Free text to link against node aliases.")
@click.option("--hops", default=1, show_default=True, type=int)
@click.option("--cap", default=12, show_default=True, type=int)
def kg_query(file, point, hops, cap):
    """Link a knowledge point and print the retrieved facts."""
    try:
        graph = load_graph_file(file)
        seeds = link_knowledge_points(point, graph)
        bundle = query_context(graph, seeds, hop_limit=hops, cap=cap)
    except OSError as exc:
        raise click.ClickException(f"cannot read {file}: {exc}")
    except IntelliChainError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"seeds: {', '.join(bundle.seeds) if bundle.seeds else '(none)'}")
    for fact in bundle.facts:
        click.echo(fact.sentence)
    if bundle.truncated:
        click.echo("(truncated)")


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path())
@click.option("--problem", "problem_path", required=True, type=click.Path())
@click.option("--script", "script_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
def ablate(graph_path, problem_path, script_path, out_path):
    """Run the three-configuration comparison and write the report."""
    try:
        graph = load_graph_file(graph_path)
        problem = load_problem_file(problem_path)
        entries = load_learner_entries_file(script_path)
        report, sessions = run_ablation(problem, graph, default_scripted_backend(), entries)
    except OSError as exc:
        raise click.ClickException(str(exc))
    except IntelliChainError as exc:
        raise click.ClickException(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(report_json(report))
    stem, _ = os.path.splitext(out_path)
    for config, session in sessions.items():
        transcript_path = f"{stem}_{config.value}.jsonl"
        with open(transcript_path, "w", encoding="utf-8") as fh:
            fh.write(transcript_to_jsonl(session) + "\n")
    click.echo(f"report written to {out_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Service configuration file (JSON). Defaults to the bundled demo.")
@click.option("--mode", default="agent_kg", show_default=True,
              type=click.Choice([c.value for c in SystemConfig]))
@click.option("--problem", "problem_name", default="chicken_rabbit", show_default=True)
def tutor(config_path, mode, problem_name):
    """Interactive Socratic tutoring session on stdin/stdout."""
    try:
        settings = load_service_config(config_path) if config_path else default_service_settings()
    except (OSError, IntelliChainError, json.JSONDecodeError) as exc:
        raise click.ClickException(str(exc))
    problem = settings.problems.get(problem_name)
    if problem is None:
        raise click.ClickException(f"unknown problem {problem_name!r}")
    # Offline by default; a remote backend needs both env vars.
    if os.environ.get(BASE_URL_ENV) and os.environ.get(API_KEY_ENV):
        backend = RemoteBackend(model=settings.backend_spec.get("model", "gpt-4o-mini"))
    else:
        backend = settings.make_backend()
    config = SystemConfig(mode)
    graph = settings.graph if config is SystemConfig.AGENT_KG else None
    session = create_session(config, problem, arms=settings.arms, settings=settings.engine)
    click.echo(f"[{session.stage.value}] {problem.statement}")
    try:
        while session.status is SessionStatus.ACTIVE:
            arm = None
            if config is not SystemConfig.NO_AGENT:
                arm = session.bandit.arm(select_arm(session.bandit))
            turn = instructor_step(session, graph, backend, arm)
            append_turn(session, turn)
            click.echo(f"[{session.stage.value}] Instructor: {turn.text}")
            line = click.prompt("You", default="", show_default=False)
            append_turn(session, Turn(index=len(session.transcript), role=Role.LEARNER,
                                      text=line, stage=session.stage))
            signal = evaluate_learner(line, problem)
            if arm is not None:
                update(session.bandit, arm.id,
                       reward_from_signals(session.last_score, signal.score))
            session.last_score = signal.score
            advance_stage(session, signal.score)
            click.echo(f"(score {signal.score:.1f}, {signal.verdict.value})")
    except (EOFError, KeyboardInterrupt, click.Abort):
        click.echo("\nbye")
        return
    except IntelliChainError as exc:
        raise click.ClickException(str(exc))
    click.echo("Session complete. Well done!")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(config_path, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    try:
        settings = load_service_config(config_path) if config_path else default_service_settings()
    except (OSError, IntelliChainError, json.JSONDecodeError) as exc:
        raise click.ClickException(str(exc))
    uvicorn.run(create_app(settings), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
