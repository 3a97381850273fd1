"""Mathematics knowledge graph: loading, alias linking, and context retrieval.

The graph is immutable after load and safe to share across sessions. All
query operations are pure reads.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    DanglingEdge,
    DuplicateAlias,
    DuplicateNodeId,
    MalformedDocument,
    SelfLoopEdge,
    UnknownSeed,
)

DEFAULT_HOP_LIMIT = 1
DEFAULT_FACT_CAP = 12

_NON_ALNUM = re.compile(r"[^0-9a-z]+")


def normalize(text: str) -> str:
    """Lowercase, map punctuation to spaces, collapse whitespace."""
    return " ".join(_NON_ALNUM.sub(" ", text.lower()).split())


class NodeKind(str, Enum):
    CONCEPT = "concept"
    PRINCIPLE = "principle"
    EXAMPLE = "example"


class Relation(str, Enum):
    PREREQUISITE_OF = "prerequisite_of"
    INSTANCE_OF = "instance_of"
    RELATED_TO = "related_to"
    APPLIES_TO = "applies_to"


@dataclass(frozen=True)
class KnowledgeNode:
    id: str
    kind: NodeKind
    label: str
    description: str
    aliases: tuple[str, ...]


@dataclass(frozen=True)
class KnowledgeEdge:
    source: str
    target: str
    relation: Relation
    note: str | None = None


@dataclass(frozen=True)
class Fact:
    """One retrieved edge plus its prompt-ready rendering."""

    subject: str
    relation: Relation
    object: str
    sentence: str


@dataclass(frozen=True)
class ContextBundle:
    seeds: tuple[str, ...]
    facts: tuple[Fact, ...]
    hop_limit: int
    truncated: bool

    def to_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "facts": [
                {
                    "subject": f.subject,
                    "relation": f.relation.value,
                    "object": f.object,
                    "sentence": f.sentence,
                }
                for f in self.facts
            ],
            "hop_limit": self.hop_limit,
            "truncated": self.truncated,
        }


@dataclass(frozen=True)
class KnowledgeGraph:
    nodes: dict[str, KnowledgeNode]
    edges: tuple[KnowledgeEdge, ...]
    alias_index: dict[str, str] = field(compare=False)

    def has_edge(self, subject: str, relation: Relation, obj: str) -> bool:
        return any(
            e.source == subject and e.relation == relation and e.target == obj
            for e in self.edges
        )


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise MalformedDocument(message)


def load_graph(source: str) -> KnowledgeGraph:
    """Parse and validate a JSON knowledge-graph document."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "top level must be an object")
    _require(isinstance(doc.get("nodes"), list), 'missing "nodes" array')
    _require(isinstance(doc.get("edges"), list), 'missing "edges" array')

    nodes: dict[str, KnowledgeNode] = {}
    alias_index: dict[str, str] = {}
    for raw in doc["nodes"]:
        _require(isinstance(raw, dict), "node entries must be objects")
        node_id = raw.get("id")
        _require(isinstance(node_id, str) and node_id != "", "node id must be a non-empty string")
        _require(not any(c.isspace() for c in node_id), f"node id {node_id!r} contains whitespace")
        if node_id in nodes:
            raise DuplicateNodeId(node_id)
        try:
            kind = NodeKind(raw.get("kind"))
        except ValueError:
            raise MalformedDocument(f"node {node_id!r}: unknown kind {raw.get('kind')!r}") from None
        label = raw.get("label")
        _require(isinstance(label, str) and label != "", f"node {node_id!r}: label required")
        description = raw.get("description", "")
        _require(isinstance(description, str), f"node {node_id!r}: description must be a string")
        raw_aliases = raw.get("aliases", [])
        _require(
            isinstance(raw_aliases, list) and all(isinstance(a, str) for a in raw_aliases),
            f"node {node_id!r}: aliases must be a list of strings",
        )
        # The label always counts as an alias of its own node.
        aliases: list[str] = []
        for alias in [label, *raw_aliases]:
            if alias not in aliases:
                aliases.append(alias)
        for alias in aliases:
            norm = normalize(alias)
            _require(norm != "", f"node {node_id!r}: alias {alias!r} normalizes to empty")
            owner = alias_index.get(norm)
            if owner is not None and owner != node_id:
                raise DuplicateAlias(f"alias {norm!r} claimed by both {owner!r} and {node_id!r}")
            alias_index[norm] = node_id
        nodes[node_id] = KnowledgeNode(node_id, kind, label, description, tuple(aliases))

    edges: list[KnowledgeEdge] = []
    for raw in doc["edges"]:
        _require(isinstance(raw, dict), "edge entries must be objects")
        source_id, target_id = raw.get("source"), raw.get("target")
        _require(isinstance(source_id, str) and isinstance(target_id, str), "edge endpoints must be strings")
        try:
            relation = Relation(raw.get("relation"))
        except ValueError:
            raise MalformedDocument(f"unknown relation {raw.get('relation')!r}") from None
        for endpoint in (source_id, target_id):
            if endpoint not in nodes:
                raise DanglingEdge(endpoint)
        if source_id == target_id:
            raise SelfLoopEdge(source_id)
        note = raw.get("note")
        _require(note is None or isinstance(note, str), "edge note must be a string")
        edges.append(KnowledgeEdge(source_id, target_id, relation, note))

    return KnowledgeGraph(nodes=nodes, edges=tuple(edges), alias_index=alias_index)


def load_graph_file(path: str) -> KnowledgeGraph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read())


def serialize_graph(graph: KnowledgeGraph) -> str:
    """Emit the graph in the external file format (round-trips through load_graph)."""
    doc = {
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "label": n.label,
                "description": n.description,
                "aliases": list(n.aliases),
            }
            for n in graph.nodes.values()
        ],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "relation": e.relation.value,
                **({"note": e.note} if e.note is not None else {}),
            }
            for e in graph.edges
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def link_knowledge_points(text: str, graph: KnowledgeGraph) -> list[str]:
    """Find node ids whose aliases occur as whole phrases in the text.

    Overlapping matches resolve longest-alias-first, then lexicographically by
    node id; the result is ordered by first match position with duplicates
    removed.
    """
    tokens = normalize(text).split()
    if not tokens:
        return []
    candidates: list[tuple[int, int, str]] = []  # (start, length, node id)
    for alias_norm, node_id in graph.alias_index.items():
        alias_tokens = alias_norm.split()
        width = len(alias_tokens)
        for start in range(len(tokens) - width + 1):
            if tokens[start : start + width] == alias_tokens:
                candidates.append((start, width, node_id))

    occupied: set[int] = set()
    accepted: list[tuple[int, str]] = []
    for start, width, node_id in sorted(candidates, key=lambda c: (-c[1], c[2], c[0])):
        span = range(start, start + width)
        if any(pos in occupied for pos in span):
            continue
        occupied.update(span)
        accepted.append((start, node_id))

    ordered: list[str] = []
    for _, node_id in sorted(accepted):
        if node_id not in ordered:
            ordered.append(node_id)
    return ordered


def _render_sentence(graph: KnowledgeGraph, edge: KnowledgeEdge) -> str:
    subject = graph.nodes[edge.source]
    obj = graph.nodes[edge.target]
    return f"{subject.label} —{edge.relation.value}→ {obj.label}: {obj.description}"


def query_context(
    graph: KnowledgeGraph,
    seeds: list[str],
    hop_limit: int = DEFAULT_HOP_LIMIT,
    cap: int = DEFAULT_FACT_CAP,
) -> ContextBundle:
    """Breadth-first expansion from the seeds over undirected edge incidence.

    An edge is included when both its endpoints lie within hop_limit hops of
    the seed set. Facts are ordered by (hop distance, relation, subject id,
    object id); truncation at cap sets the truncated flag.
    """
    if hop_limit < 0:
        raise ValueError("hop_limit must be >= 0")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    unique_seeds: list[str] = []
    for seed in seeds:
        if seed not in graph.nodes:
            raise UnknownSeed(seed)
        if seed not in unique_seeds:
            unique_seeds.append(seed)

    adjacency: dict[str, set[str]] = {node_id: set() for node_id in graph.nodes}
    for edge in graph.edges:
        adjacency[edge.source].add(edge.target)
        adjacency[edge.target].add(edge.source)

    distance: dict[str, int] = {seed: 0 for seed in unique_seeds}
    frontier = deque(unique_seeds)
    while frontier:
        current = frontier.popleft()
        if distance[current] >= hop_limit:
            continue
        for neighbor in adjacency[current]:
            if neighbor not in distance:
                distance[neighbor] = distance[current] + 1
                frontier.append(neighbor)

    reachable: list[tuple[int, KnowledgeEdge]] = []
    for edge in graph.edges:
        if edge.source in distance and edge.target in distance:
            hops = max(distance[edge.source], distance[edge.target])
            if hops <= hop_limit:
                reachable.append((hops, edge))
    reachable.sort(key=lambda item: (item[0], item[1].relation.value, item[1].source, item[1].target))

    truncated = len(reachable) > cap
    facts = tuple(
        Fact(edge.source, edge.relation, edge.target, _render_sentence(graph, edge))
        for _, edge in reachable[:cap]
    )
    return ContextBundle(
        seeds=tuple(unique_seeds), facts=facts, hop_limit=hop_limit, truncated=truncated
    )


def render_facts(bundle: ContextBundle) -> str:
    """One line per fact in bundle order; empty bundle renders as empty string."""
    return "\n".join(fact.sentence for fact in bundle.facts)
