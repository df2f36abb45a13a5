import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from pagerank_games.graph import (
    Graph,
    GraphError,
    biconnected_components,
    block_chain,
    check_swap_automorphism,
    components_after_removal,
    generate,
    k_parameter,
    parse_graph,
    random_tree,
    serialize_graph,
)

from conftest import random_connected


def to_nx(G):
    H = nx.Graph()
    H.add_nodes_from(range(G.n))
    H.add_edges_from(G.edges())
    return H


def test_parse_comments_duplicates_and_labels():
    G = parse_graph("# triangle\na b\nb c  # trailing\nc a\nb a\n\n")
    assert G.n == 3 and G.num_edges == 3
    assert G.labels == ("a", "b", "c")
    assert G.is_complete()


def test_parse_isolated_vertex_token():
    G = parse_graph("1 2\n3\n")
    assert G.n == 3 and G.degree(G.index_of("3")) == 0


@pytest.mark.parametrize("text, fragment", [
    ("a a\n", "line 1: self-loop"),
    ("a b\nc d e\n", "line 2"),
    ("# nothing\n\n", "empty"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(GraphError, match=fragment):
        parse_graph(text)


def test_serialize_orders_labels_numerically():
    G = parse_graph("10 2\n2 1\n")
    assert serialize_graph(G) == "1 2\n2 10\n"


@pytest.mark.parametrize("kind, n", [("complete", 5), ("path", 4), ("cycle", 6), ("star", 3)])
def test_generators_shape(kind, n):
    G = generate(kind, n)
    expected_edges = {"complete": n * (n - 1) // 2, "path": n - 1, "cycle": n, "star": n}[kind]
    assert G.num_edges == expected_edges
    assert G.is_connected()


def test_generators_are_seed_deterministic():
    assert generate("gnp", 12, p=0.3, seed=4) == generate("gnp", 12, p=0.3, seed=4)
    assert generate("random_tree", 30, seed=9) == generate("random_tree", 30, seed=9)
    assert generate("random_tree", 30, seed=9).is_tree()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["complete", "path", "cycle", "star", "random_tree", "gnp"]),
       st.integers(3, 14), st.integers(0, 10 ** 6))
def test_round_trip(kind, n, seed):
    G = generate(kind, n, p=0.3, seed=seed)
    assert parse_graph(serialize_graph(G)) == G


def test_components_after_removal_cut_vertex():
    # two triangles sharing vertex 0
    G = Graph(5, [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)])
    d = components_after_removal(G, 0)
    assert [sorted(C) for C, _ in d.components] == [[1, 2], [3, 4]]
    assert [sorted(U) for _, U in d.components] == [[1, 2], [3, 4]]
    assert d.component_of(4) == 1


def test_components_partition_neighbours(rng):
    for _ in range(30):
        G = random_connected(rng, 2, 10)
        for v in range(G.n):
            d = components_after_removal(G, v)
            attach = [u for _, U in d.components for u in U]
            assert sorted(attach) == sorted(G.neighbors(v))
            verts = sorted(w for C, _ in d.components for w in C)
            assert verts == [w for w in range(G.n) if w != v]


def test_biconnected_matches_networkx(rng):
    for _ in range(40):
        G = random_connected(rng, 2, 12)
        blocks, arts = biconnected_components(G)
        ref = nx.biconnected_component_edges(to_nx(G))
        norm = lambda es: frozenset(tuple(sorted(e)) for e in es)
        assert {norm(b) for b in blocks} == {norm(b) for b in ref}
        assert arts == set(nx.articulation_points(to_nx(G)))


def test_k_parameter_values():
    assert k_parameter(generate("random_tree", 20, seed=1)).k == 1
    assert k_parameter(generate("cycle", 7)).k == 2
    assert k_parameter(generate("complete", 5)).k == 4
    assert k_parameter(block_chain(10, 7, 3)).k == 6


def test_k_parameter_against_networkx(rng):
    for _ in range(30):
        G = random_connected(rng, 3, 10)
        if G.is_forest():
            continue
        H = to_nx(G)
        k = max(max(dict(H.edge_subgraph(b).degree()).values()) for b in nx.biconnected_component_edges(H))
        assert k_parameter(G).k == k


def test_swap_automorphism():
    C4 = generate("cycle", 4)
    assert check_swap_automorphism(C4, [2, 1, 0, 3], 0, 2)
    assert not check_swap_automorphism(C4, [1, 0, 2, 3], 0, 1)
    with pytest.raises(GraphError):
        check_swap_automorphism(C4, [0, 0, 1, 2], 0, 2)


def test_forest_flags():
    T = random_tree(15, random.Random(2))
    assert T.is_forest() and T.is_tree()
    F = T.with_edges(remove=[T.edges()[0]])
    assert F.is_forest() and not F.is_tree()
    assert not generate("cycle", 5).is_forest()
