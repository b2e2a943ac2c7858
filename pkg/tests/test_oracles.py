from aqss.oracles import (
    brute_force_clique_cover,
    clique_bruteforce,
    connected_graphs,
    p_formula,
    parity_law,
    qts_disentangle,
    run_suite,
    set_partitions,
)

import pytest


def test_set_partitions_bell_numbers():
    assert [sum(1 for _ in set_partitions(list(range(n)))) for n in range(6)] == [1, 1, 2, 5, 15, 52]


def test_connected_graph_counts():
    # connected labeled graphs on 1..4 vertices: 1, 1, 4, 38
    counts = {}
    for n, _ in connected_graphs(4):
        counts[n] = counts.get(n, 0) + 1
    assert counts == {1: 1, 2: 1, 3: 4, 4: 38}


def test_brute_force_cover():
    assert brute_force_clique_cover(3, set()) == 3
    assert brute_force_clique_cover(3, {(0, 1), (0, 2), (1, 2)}) == 1
    assert brute_force_clique_cover(4, {(0, 1), (1, 2), (2, 3)}) == 2


def test_small_suites_agree():
    assert clique_bruteforce(max_n=4, random_graphs=20, random_max=6).agree
    assert qts_disentangle(schemes=((2, 3),), superpositions=4).agree
    assert parity_law(ns=(3,), samples=200).agree
    assert p_formula(sizes=(1, 2), ps=(0.1,), samples=10_000).agree


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("bogus")
