import json
import random

import pytest
from hypothesis import given, strategies as st

from intellichain.errors import (
    DanglingEdge,
    DuplicateAlias,
    DuplicateNodeId,
    MalformedDocument,
    SelfLoopEdge,
    UnknownSeed,
)
from intellichain.kg import (
    link_knowledge_points,
    load_graph,
    normalize,
    query_context,
    render_facts,
    serialize_graph,
)


def make_doc(nodes, edges):
    return json.dumps({"nodes": nodes, "edges": edges})


def node(node_id, label=None, kind="concept", aliases=(), description="d"):
    return {
        "id": node_id,
        "kind": kind,
        "label": label or node_id.replace("_", " "),
        "description": description,
        "aliases": list(aliases),
    }


def chain_graph():
    """A - B - C - D - E, prerequisite edges along the chain."""
    nodes = [node(x) for x in "ABCDE"]
    edges = [
        {"source": a, "target": b, "relation": "prerequisite_of"}
        for a, b in zip("ABCD", "BCDE")
    ]
    return load_graph(make_doc(nodes, edges))


class TestNormalize:
    def test_lowercase_punctuation_whitespace(self):
        assert normalize("  Chicken-Rabbit   Problem! ") == "chicken rabbit problem"

    def test_empty(self):
        assert normalize("—!?") == ""


class TestLoadGraph:
    def test_empty_document(self):
        graph = load_graph(make_doc([], []))
        assert len(graph.nodes) == 0
        assert len(graph.edges) == 0

    def test_minimal_two_nodes_one_edge(self):
        graph = load_graph(
            make_doc(
                [node("A"), node("B")],
                [{"source": "A", "target": "B", "relation": "prerequisite_of"}],
            )
        )
        assert set(graph.nodes) == {"A", "B"}
        assert len(graph.edges) == 1

    def test_dangling_edge_names_missing_node(self):
        with pytest.raises(DanglingEdge, match="C"):
            load_graph(
                make_doc([node("A")], [{"source": "A", "target": "C", "relation": "related_to"}])
            )

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoopEdge):
            load_graph(
                make_doc([node("A")], [{"source": "A", "target": "A", "relation": "related_to"}])
            )

    def test_duplicate_node_id(self):
        with pytest.raises(DuplicateNodeId):
            load_graph(make_doc([node("A"), node("A")], []))

    def test_duplicate_alias_across_nodes(self):
        with pytest.raises(DuplicateAlias):
            load_graph(make_doc([node("A", aliases=["shared"]), node("B", aliases=["Shared!"])], []))

    def test_malformed_json(self):
        with pytest.raises(MalformedDocument):
            load_graph("{not json")

    def test_unknown_kind(self):
        with pytest.raises(MalformedDocument):
            load_graph(make_doc([node("A", kind="topic")], []))

    def test_whitespace_in_id(self):
        with pytest.raises(MalformedDocument):
            load_graph(make_doc([node("a b")], []))

    def test_label_always_indexed_as_alias(self):
        graph = load_graph(make_doc([node("A", label="Alpha Node", aliases=[])], []))
        assert graph.alias_index["alpha node"] == "A"

    def test_alias_index_covers_all_aliases(self, demo_graph):
        expected = {
            normalize(alias): n.id for n in demo_graph.nodes.values() for alias in n.aliases
        }
        assert demo_graph.alias_index == expected


class TestRoundTrip:
    def test_demo_graph_fixed_point(self, demo_graph):
        once = serialize_graph(demo_graph)
        again = serialize_graph(load_graph(once))
        assert once == again
        assert load_graph(once) == demo_graph

    def test_synthetic_round_trip(self):
        graph = chain_graph()
        assert load_graph(serialize_graph(graph)) == graph


class TestLinkKnowledgePoints:
    def test_empty_text(self, demo_graph):
        assert link_knowledge_points("", demo_graph) == []

    def test_single_alias_hit(self, demo_graph):
        ids = link_knowledge_points(
            "Maybe a system of linear equations would work here", demo_graph
        )
        assert ids == ["system_of_linear_equations"]

    def test_longest_alias_wins_on_overlap(self, demo_graph):
        # Brute-force check by hand: the five-token alias covers the whole
        # text, so the two-token "linear equations" and one-token "variables"
        # matches overlap it and are dropped.
        ids = link_knowledge_points("linear equations in two variables", demo_graph)
        assert ids == ["linear_equation_two_variables"]

    def test_ordering_by_first_match_position(self, demo_graph):
        ids = link_knowledge_points("elimination then substitution", demo_graph)
        assert ids == ["elimination_method", "substitution_method"]

    def test_no_match(self, demo_graph):
        assert link_knowledge_points("zzzz qqqq", demo_graph) == []

    def test_deterministic(self, demo_graph):
        text = "substitution and elimination for a system of equations"
        first = link_knowledge_points(text, demo_graph)
        assert all(link_knowledge_points(text, demo_graph) == first for _ in range(5))

    def test_alias_totality(self, demo_graph):
        for n in demo_graph.nodes.values():
            assert n.id in link_knowledge_points(n.label, demo_graph)


class TestQueryContext:
    def test_no_seeds(self, demo_graph):
        bundle = query_context(demo_graph, [])
        assert bundle.facts == ()
        assert bundle.truncated is False

    def test_zero_hops_needs_both_endpoints_seeded(self):
        graph = chain_graph()
        assert query_context(graph, ["A"], hop_limit=0).facts == ()
        bundle = query_context(graph, ["A", "B"], hop_limit=0)
        assert [(f.subject, f.object) for f in bundle.facts] == [("A", "B")]

    def test_chain_two_hops(self):
        # Independent BFS on the 5-node chain: A at 0, B at 1, C at 2, D at 3.
        bundle = query_context(chain_graph(), ["A"], hop_limit=2, cap=100)
        assert [(f.subject, f.object) for f in bundle.facts] == [("A", "B"), ("B", "C")]

    def test_unknown_seed(self, demo_graph):
        with pytest.raises(UnknownSeed):
            query_context(demo_graph, ["nope"])

    def test_truncation_sets_flag(self, demo_graph):
        bundle = query_context(demo_graph, list(demo_graph.nodes), hop_limit=2, cap=3)
        assert len(bundle.facts) == 3
        assert bundle.truncated is True

    def test_soundness_all_facts_are_graph_edges(self, demo_graph):
        bundle = query_context(demo_graph, ["chicken_rabbit"], hop_limit=2, cap=100)
        assert bundle.facts
        for f in bundle.facts:
            assert demo_graph.has_edge(f.subject, f.relation, f.object)

    def test_monotonic_in_hop_limit(self, demo_graph):
        seeds = ["chicken_rabbit"]
        previous = set()
        for hops in range(5):
            facts = {
                (f.subject, f.relation, f.object)
                for f in query_context(demo_graph, seeds, hop_limit=hops, cap=10_000).facts
            }
            assert previous <= facts
            previous = facts


def random_graph(rng, max_nodes=30):
    n = rng.randint(1, max_nodes)
    ids = [f"n{i}" for i in range(n)]
    nodes = [node(i, label=f"label {i}") for i in ids]
    edges = []
    relations = ["prerequisite_of", "instance_of", "related_to", "applies_to"]
    for _ in range(rng.randint(0, 3 * n)):
        a, b = rng.sample(ids, 2) if n > 1 else (None, None)
        if a is None:
            break
        edges.append({"source": a, "target": b, "relation": rng.choice(relations)})
    return load_graph(make_doc(nodes, edges))


def bfs_oracle(graph, seeds, hop_limit):
    """Straightforward independent BFS used to cross-check query_context."""
    dist = {s: 0 for s in seeds}
    frontier = list(seeds)
    for hop in range(hop_limit):
        nxt = []
        for u in frontier:
            for e in graph.edges:
                for v in (e.target if e.source == u else None, e.source if e.target == u else None):
                    if v is not None and v not in dist:
                        dist[v] = hop + 1
                        nxt.append(v)
        frontier = nxt
    return {
        (e.source, e.relation, e.target)
        for e in graph.edges
        if e.source in dist and e.target in dist
        and max(dist[e.source], dist[e.target]) <= hop_limit
    }


def test_query_context_matches_independent_bfs_on_random_graphs():
    rng = random.Random(1234)
    for _ in range(50):
        graph = random_graph(rng)
        ids = list(graph.nodes)
        seeds = rng.sample(ids, rng.randint(0, min(3, len(ids))))
        hop_limit = rng.randint(0, 4)
        bundle = query_context(graph, seeds, hop_limit=hop_limit, cap=10_000)
        got = {(f.subject, f.relation, f.object) for f in bundle.facts}
        assert got == bfs_oracle(graph, seeds, hop_limit)
        assert bundle.truncated is False


class TestRenderFacts:
    def test_empty(self, demo_graph):
        assert render_facts(query_context(demo_graph, [])) == ""

    def test_template(self):
        graph = load_graph(
            make_doc(
                [node("A", label="Alpha", description="first"),
                 node("B", label="Beta", description="second")],
                [{"source": "A", "target": "B", "relation": "prerequisite_of"}],
            )
        )
        bundle = query_context(graph, ["A", "B"], hop_limit=0)
        assert render_facts(bundle) == "Alpha —prerequisite_of→ Beta: second"

    def test_three_facts_three_lines(self, demo_graph):
        bundle = query_context(demo_graph, ["system_of_linear_equations"], hop_limit=1, cap=3)
        rendered = render_facts(bundle)
        assert rendered.count("\n") == 2
        assert rendered.splitlines() == [f.sentence for f in bundle.facts]


@given(st.text(max_size=80))
def test_normalize_idempotent(text):
    assert normalize(normalize(text)) == normalize(text)
