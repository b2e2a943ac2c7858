import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqss.access import ASGraph, AccessStructure, build_as_graph, parse_access_structure
from aqss.cliques import greedy_partition, lambda_of, min_clique_partition
from aqss.errors import CapacityError
from aqss.oracles import brute_force_clique_cover


def test_two_cliques(two_cliques):
    graph = build_as_graph(two_cliques)
    part = min_clique_partition(graph)
    assert part.size == 2 and part.exact and part.is_valid(graph)
    names = [{two_cliques.sets[v] for v in cls} for cls in part.classes]
    assert {("A", "B"), ("A", "C"), ("A", "D", "G")} in names


def test_complete_k5():
    graph = ASGraph.from_edges(5, itertools.combinations(range(5), 2))
    assert min_clique_partition(graph).size == 1


@pytest.mark.parametrize("r", [1, 2, 5, 12])
def test_edgeless(r):
    assert min_clique_partition(ASGraph.from_edges(r, [])).size == r


def test_worked_lambda():
    assert lambda_of(build_as_graph(parse_access_structure("{ABC, BD, EFG}"))) == 2


def test_deterministic_lexicographic():
    # path 0-1-2-3: minimum partitions are {01,23} and ...; lex-least RGS is 0,0,1,1
    graph = ASGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    part = min_clique_partition(graph)
    assert part.classes == ((0, 1), (2, 3))


def test_cap_and_heuristic():
    graph = ASGraph.from_edges(25, [(i, i + 1) for i in range(24)])
    with pytest.raises(CapacityError):
        min_clique_partition(graph)
    part = min_clique_partition(graph, heuristic=True)
    assert not part.exact and part.is_valid(graph)


graphs = st.integers(1, 8).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])),
    )
)


@settings(max_examples=150, deadline=None)
@given(graphs)
def test_matches_brute_force(case):
    n, edges = case
    graph = ASGraph.from_edges(n, edges)
    part = min_clique_partition(graph)
    assert part.is_valid(graph)
    assert part.size == brute_force_clique_cover(n, set(graph.edges))
    assert part.size <= greedy_partition(graph).size
    # lambda >= number of connected components
    assert part.size >= len(graph.components())


@given(st.lists(st.sets(st.sampled_from("ABCDEFG"), min_size=1, max_size=3), min_size=1, max_size=7))
def test_lambda_one_iff_no_cloning(raw):
    from aqss.access import check_no_cloning

    g = AccessStructure.from_sets(raw)
    assert (lambda_of(build_as_graph(g)) == 1) == check_no_cloning(g)
