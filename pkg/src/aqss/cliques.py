"""Minimum clique partition (clique cover) of an overlap graph.

Equivalent to colouring the complement graph. Exact search is a
branch-and-bound over vertex assignments in canonical order; the first
solution met is the lexicographically least one (as a restricted growth
string), so iterative deepening on the class budget returns the least
minimum partition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .access import ASGraph
from .errors import CapacityError

MAX_EXACT = 20


@dataclass(frozen=True)
class CliquePartition:
    classes: tuple[tuple[int, ...], ...]
    exact: bool = True

    @property
    def size(self) -> int:
        return len(self.classes)

    def assignment(self) -> tuple[int, ...]:
        n = sum(len(c) for c in self.classes)
        out = [0] * n
        for i, cls in enumerate(self.classes):
            for v in cls:
                out[v] = i
        return tuple(out)

    def is_valid(self, graph: ASGraph) -> bool:
        adj = graph.adjacency()
        seen = sorted(v for c in self.classes for v in c)
        if seen != list(range(graph.n)):
            return False
        for cls in self.classes:
            for v in cls:
                others = sum(1 << u for u in cls if u != v)
                if others & ~adj[v]:
                    return False
        return True

    def to_json(self) -> dict:
        return {"size": self.size, "classes": [list(c) for c in self.classes], "exact": self.exact}


def _from_assignment(assign: list[int], exact: bool) -> CliquePartition:
    k = max(assign) + 1 if assign else 0
    classes = [[] for _ in range(k)]
    for v, c in enumerate(assign):
        classes[c].append(v)
    return CliquePartition(tuple(tuple(c) for c in classes), exact)


def greedy_partition(graph: ASGraph) -> CliquePartition:
    """First-fit in vertex order; an upper bound on the minimum."""
    adj = graph.adjacency()
    masks: list[int] = []
    assign = []
    for v in range(graph.n):
        for i, m in enumerate(masks):
            if m & ~adj[v] == 0:
                masks[i] |= 1 << v
                assign.append(i)
                break
        else:
            masks.append(1 << v)
            assign.append(len(masks) - 1)
    return _from_assignment(assign, exact=False)


def _independent_lower_bound(adj: list[int], remaining: int, masks: list[int]) -> tuple[int, int]:
    """Greedy independent set among ``remaining``: its size, and how many of
    its members fit no existing class."""
    size = 0
    stuck = 0
    pool = remaining
    while pool:
        v = (pool & -pool).bit_length() - 1
        size += 1
        if not any(m & ~adj[v] == 0 for m in masks):
            stuck += 1
        pool &= ~(adj[v] | (1 << v))
    return size, stuck


def _search(adj: list[int], n: int, limit: int) -> list[int] | None:
    assign = [0] * n
    masks: list[int] = []

    def dfs(v: int) -> bool:
        if v == n:
            return True
        remaining = ((1 << n) - 1) & ~((1 << v) - 1)
        size, stuck = _independent_lower_bound(adj, remaining, masks)
        if max(size, len(masks) + stuck) > limit:
            return False
        for i in range(len(masks)):
            if masks[i] & ~adj[v] == 0:
                masks[i] |= 1 << v
                assign[v] = i
                if dfs(v + 1):
                    return True
                masks[i] &= ~(1 << v)
        if len(masks) < limit:
            masks.append(1 << v)
            assign[v] = len(masks) - 1
            if dfs(v + 1):
                return True
            masks.pop()
        return False

    return assign if dfs(0) else None


def min_clique_partition(
    graph: ASGraph, *, max_exact: int = MAX_EXACT, heuristic: bool = False
) -> CliquePartition:
    """Partition the vertices into the fewest cliques.

    Exact for graphs with at most ``max_exact`` vertices, returning the
    lexicographically least minimum partition. Larger graphs raise
    CapacityError unless ``heuristic`` is set, in which case the first-fit
    partition is returned with ``exact=False``.
    """
    if graph.n == 0:
        return CliquePartition((), True)
    if graph.n > max_exact:
        if heuristic:
            return greedy_partition(graph)
        raise CapacityError(
            f"exact clique partition limited to {max_exact} vertices, graph has {graph.n}; "
            "pass heuristic=True for a first-fit partition"
        )
    adj = graph.adjacency()
    upper = greedy_partition(graph).size
    lower, _ = _independent_lower_bound(adj, (1 << graph.n) - 1, [])
    for limit in range(max(lower, 1), upper + 1):
        found = _search(adj, graph.n, limit)
        if found is not None:
            return _from_assignment(found, exact=True)
    raise AssertionError("first-fit partition should have been reachable")


def lambda_of(graph: ASGraph) -> int:
    return min_clique_partition(graph).size

