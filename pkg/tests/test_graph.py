import random

import pytest
from gen import random_graph
from hypothesis import given
from hypothesis import strategies as st
from oracles import bfs, degree_centrality, diameter

from rilsim.graph import CommunityGraph, GraphError, centrality, community_distance, mainstream

STAR = CommunityGraph.build(["hub", "a", "b", "c"], [("hub", "a"), ("hub", "b"), ("hub", "c")], {"k": "a"})


def test_star_distances_and_centrality():
    assert community_distance(STAR, "a", "b") == 2
    assert community_distance(STAR, "a", "a") == 0
    assert STAR.diameter == 2
    assert centrality(STAR) == {"hub": 1.0, "a": 1 / 3, "b": 1 / 3, "c": 1 / 3}
    assert STAR.community_of("k") == "a"


def test_single_community_is_fully_central():
    g = CommunityGraph.build(["only"], [], {})
    assert centrality(g) == {"only": 1.0}
    assert g.diameter == 0


def test_mainstream_threshold_is_strict():
    scores = {"x": 0.5, "y": 0.51, "z": 0.1}
    assert mainstream(scores, 0.5) == {"y"}


@pytest.mark.parametrize("comms, edges, placement, fragment", [
    (["a", "b"], [], {}, "disconnected"),
    (["a"], [("a", "zz")], {}, "not a community"),
    (["a", "b"], [("a", "b")], {"k": "nowhere"}, "nowhere"),
])
def test_bad_graphs_rejected(comms, edges, placement, fragment):
    with pytest.raises(GraphError, match=fragment):
        CommunityGraph.build(comms, edges, placement)


@given(st.integers(0, 10**6), st.integers(1, 9))
def test_bfs_and_centrality_match_oracle(seed, n):
    comms, edges = random_graph(random.Random(seed), n)
    g = CommunityGraph.build(comms, edges, {})
    for c in comms:
        assert g.distances_from(c) == bfs(edges, c)
    assert g.diameter == diameter(comms, edges)
    assert centrality(g) == pytest.approx(degree_centrality(comms, edges))
    for a in comms:
        for b in comms:
            assert community_distance(g, a, b) == community_distance(g, b, a)
