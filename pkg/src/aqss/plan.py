"""Assisted share plans: nested threshold schemes built from a clique partition.

A plan is a tree. Leaves name the party that receives the share (a player or
the dealer); internal nodes are ((k, n)) threshold schemes over their
children. With lambda > 1 the root is a ((lambda, 2 lambda - 1)) scheme whose
first lambda shares go one per partially linked class and whose remaining
lambda - 1 shares stay with the dealer as home shares.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field

from .access import (
    DEALER,
    AccessStructure,
    add_common_player,
    build_as_graph,
    check_no_cloning,
    fresh_player,
    maximalize,
)
from .cliques import CliquePartition, min_clique_partition
from .errors import StructureError

STRICT = "strict"
DEALER_ASSISTED = "dealer-assisted"
MODES = (STRICT, DEALER_ASSISTED)

MAX_ANALYTICS_PLAYERS = 16


@dataclass(frozen=True)
class Leaf:
    owner: str
    role: str = "share"  # share | extra | home

    def to_json(self) -> dict:
        return {"kind": "leaf", "owner": self.owner, "role": self.role}


@dataclass(frozen=True)
class Threshold:
    k: int
    children: tuple

    def __post_init__(self):
        if not 1 <= self.k <= len(self.children):
            raise StructureError(f"threshold ({self.k},{len(self.children)}) out of range")

    @property
    def n(self) -> int:
        return len(self.children)

    @property
    def quantum_ok(self) -> bool:
        return self.n <= 2 * self.k - 1

    def to_json(self) -> dict:
        return {
            "kind": "threshold",
            "k": self.k,
            "n": self.n,
            "children": [c.to_json() for c in self.children],
        }


PlanNode = Leaf | Threshold


def node_from_json(data: dict) -> PlanNode:
    kind = data.get("kind")
    if kind == "leaf":
        return Leaf(data["owner"], data.get("role", "share"))
    if kind == "threshold":
        children = tuple(node_from_json(c) for c in data["children"])
        if "n" in data and data["n"] != len(children):
            raise StructureError("threshold node n disagrees with its child count")
        return Threshold(int(data["k"]), children)
    raise StructureError(f"unknown plan node kind {kind!r}")


def iter_leaves(node: PlanNode):
    if isinstance(node, Leaf):
        yield node
    else:
        for c in node.children:
            yield from iter_leaves(c)


def iter_thresholds(node: PlanNode):
    if isinstance(node, Threshold):
        yield node
        for c in node.children:
            yield from iter_thresholds(c)


def describe(node: PlanNode, indent: int = 0) -> str:
    """Indented text rendering, one scheme per line."""
    pad = "  " * indent
    if isinstance(node, Leaf):
        return f"{pad}{node.owner}" + ("" if node.role == "share" else f" [{node.role}]")
    if all(isinstance(c, Leaf) for c in node.children):
        owners = ", ".join(c.owner for c in node.children)
        return f"{pad}(({node.k},{node.n})) : {owners}"
    lines = [f"{pad}(({node.k},{node.n}))"]
    lines += [describe(c, indent + 1) for c in node.children]
    return "\n".join(lines)


@dataclass(frozen=True)
class SharePlan:
    root: PlanNode
    mode: str
    lam: int
    home_share_count: int
    gamma: AccessStructure | None = None
    partition: CliquePartition | None = None
    flags: tuple[str, ...] = field(default=())

    def leaves(self) -> list[Leaf]:
        return list(iter_leaves(self.root))

    def parties(self) -> list[str]:
        seen = []
        for leaf in self.leaves():
            if leaf.owner not in seen:
                seen.append(leaf.owner)
        return seen

    def to_json(self) -> dict:
        out = {
            "mode": self.mode,
            "lambda": self.lam,
            "home_share_count": self.home_share_count,
            "flags": list(self.flags),
            "root": self.root.to_json(),
        }
        if self.gamma is not None:
            out["gamma"] = self.gamma.to_json()
        if self.partition is not None:
            out["partition"] = self.partition.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> SharePlan:
        root = node_from_json(data["root"])
        homes = sum(1 for leaf in iter_leaves(root) if leaf.owner == DEALER)
        gamma = None
        if "gamma" in data:
            g = data["gamma"]
            gamma = AccessStructure.from_sets(g["sets"], g.get("players"))
        return cls(root, data.get("mode", STRICT), int(data.get("lambda", 1)), homes, gamma,
                   None, tuple(data.get("flags", ())))

    def __str__(self):
        return describe(self.root)


# ------------------------------------------------------------------ building


def _and_node(players: tuple[str, ...]) -> PlanNode:
    if len(players) == 1:
        return Leaf(players[0])
    return Threshold(len(players), tuple(Leaf(p) for p in players))


def _threshold_shape(sets: list[tuple[str, ...]], order: dict[str, int]):
    """(k, players) if ``sets`` is exactly every k-subset of its union and the
    resulting ((k, n)) is quantum-realizable; otherwise None."""
    union = sorted(set().union(*sets), key=order.__getitem__)
    k = len(sets[0])
    if any(len(s) != k for s in sets):
        return None
    n = len(union)
    if len(sets) != math.comb(n, k) or n > 2 * k - 1:
        return None
    return k, tuple(union)


def _class_node(sets, gamma: AccessStructure, mode: str, flags: list[str]) -> PlanNode:
    order = {p: i for i, p in enumerate(gamma.players)}
    if len(sets) == 1:
        return _and_node(sets[0])
    shape = _threshold_shape(sets, order)
    if shape is not None:
        k, players = shape
        return Threshold(k, tuple(Leaf(p) for p in players))
    r = len(sets)
    common = sorted(set.intersection(*(set(s) for s in sets)), key=order.__getitem__)
    label = "{" + ", ".join("".join(s) for s in sets) + "}"
    if common:
        extra = Leaf(common[0], "extra")
    elif mode == DEALER_ASSISTED:
        extra = Leaf(DEALER, "home")
        flags.append(f"class {label}: no common player, {r - 1} extra share(s) held by the dealer")
    else:
        raise StructureError(
            f"class {label} has no common player and is not a threshold structure; "
            "use dealer-assisted mode"
        )
    return Threshold(r, tuple(_and_node(s) for s in sets) + (extra,) * (r - 1))


def build_aqss_plan(gamma: AccessStructure, mode: str = STRICT) -> SharePlan:
    """Nested threshold plan for ``gamma`` with lambda - 1 home shares at the root.

    Each multi-set class is realized as an ((r, 2r-1)) scheme over its
    sets' AND-subtrees; the r - 1 surplus shares go to a player common to the
    class (strict mode) or, failing that, to the dealer (dealer-assisted).
    Classes that are exactly threshold structures become a single ((k, n)).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    graph = build_as_graph(gamma)
    partition = min_clique_partition(graph, heuristic=True)
    flags: list[str] = []
    if not partition.exact:
        flags.append("clique partition is heuristic; lambda may be overestimated")
    classes = [[gamma.sets[v] for v in cls] for cls in partition.classes]
    nodes = tuple(_class_node(c, gamma, mode, flags) for c in classes)
    lam = partition.size
    if lam == 1:
        root = nodes[0]
    else:
        homes = tuple(Leaf(DEALER, "home") for _ in range(lam - 1))
        root = Threshold(lam, nodes + homes)
    home_count = sum(1 for leaf in iter_leaves(root) if leaf.owner == DEALER)
    if home_count > lam - 1:
        flags.append(f"{home_count} home shares exceed lambda - 1 = {lam - 1}")
    return SharePlan(root, mode, lam, home_count, gamma, partition, tuple(flags))


# ---------------------------------------------------------------- evaluation


def _satisfied(node: PlanNode, test) -> bool:
    if isinstance(node, Leaf):
        return test(node)
    hits = 0
    for c in node.children:
        if _satisfied(c, test):
            hits += 1
            if hits >= node.k:
                return True
    return False


def evaluate_coalition(plan: SharePlan | PlanNode, coalition: Iterable[str]) -> bool:
    """True iff the parties in ``coalition`` jointly satisfy the plan."""
    root = plan.root if isinstance(plan, SharePlan) else plan
    members = frozenset(coalition)
    return _satisfied(root, lambda leaf: leaf.owner in members)


def evaluate_shares(plan: SharePlan | PlanNode, held: Iterable[int]) -> bool:
    """Like evaluate_coalition, but over leaf positions (DFS order)."""
    root = plan.root if isinstance(plan, SharePlan) else plan
    held = frozenset(held)
    ids = {id(leaf): i for i, leaf in enumerate(_leaf_objects(root))}
    return _satisfied(root, lambda leaf: ids[id(leaf)] in held)


def _leaf_objects(node: PlanNode) -> list[Leaf]:
    # distinct objects even when equal-valued leaves repeat
    out: list[Leaf] = []

    def walk(n):
        if isinstance(n, Leaf):
            out.append(n)
        else:
            for c in n.children:
                walk(c)

    walk(node)
    return out


def _min_satisfying(node: PlanNode, first_id: int) -> tuple[set[int], int]:
    """Leaf ids of a minimal satisfying set (first k children, recursively);
    also returns the next unused id."""
    if isinstance(node, Leaf):
        return {first_id}, first_id + 1
    chosen: set[int] = set()
    cursor = first_id
    for i, c in enumerate(node.children):
        sub, nxt = _min_satisfying(c, cursor)
        if i < node.k:
            chosen |= sub
        cursor = nxt
    return chosen, cursor


def _leaf_count(node: PlanNode) -> int:
    return 1 if isinstance(node, Leaf) else sum(_leaf_count(c) for c in node.children)


def importance_witness(plan: SharePlan | PlanNode, share: int) -> frozenset[int] | None:
    """An unauthorized share set T such that T + {share} is authorized.

    Built along the root-to-leaf path: at every ancestor, k - 1 sibling
    subtrees are satisfied minimally and the path child is left pivotal.
    Returns None if no such witness exists.
    """
    root = plan.root if isinstance(plan, SharePlan) else plan
    witness: set[int] = set()
    node, offset = root, 0
    while isinstance(node, Threshold):
        starts = []
        cursor = offset
        for c in node.children:
            starts.append(cursor)
            cursor += _leaf_count(c)
        path = max(i for i, s in enumerate(starts) if s <= share)
        others = [i for i in range(node.n) if i != path][: node.k - 1]
        if len(others) < node.k - 1:
            return None
        for i in others:
            witness |= _min_satisfying(node.children[i], starts[i])[0]
        node, offset = node.children[path], starts[path]
    if offset != share:
        raise IndexError(f"share {share} out of range")
    t = frozenset(witness)
    if evaluate_shares(root, t) or not evaluate_shares(root, t | {share}):
        return None
    return t


# ------------------------------------------------------------ home shares


@dataclass(frozen=True)
class HomeShareReport:
    r: int
    lam: int
    x: int | None
    naive_count: int | None
    pure_state_count: int
    theorem_count: int
    common_player: str
    important_home_shares: tuple[int, ...]
    home_share_ids: tuple[int, ...]
    maximal_structure: AccessStructure | None = None

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "lambda": self.lam,
            "x": self.x,
            "naive_count": self.naive_count,
            "naive_formula": "r + (r-1)x",
            "pure_state_count": self.pure_state_count,
            "theorem_count": self.theorem_count,
            "common_player": self.common_player,
            "home_share_ids": list(self.home_share_ids),
            "important_home_shares": list(self.important_home_shares),
            "maximal_structure_sets": (
                None if self.maximal_structure is None
                else [list(s) for s in self.maximal_structure.sets]
            ),
        }


def home_share_analytics(gamma: AccessStructure, plan: SharePlan | None = None) -> HomeShareReport:
    """Home-share counts for the three constructions, plus importance flags.

    ``x`` counts the minimal sets containing the added common player in a
    maximalization of gamma with that player added to every set.
    """
    if plan is None:
        plan = build_aqss_plan(gamma, DEALER_ASSISTED)
    r = gamma.r
    lam = plan.lam
    extra = fresh_player(gamma)
    x = naive = None
    gmax = None
    if len(gamma.players) + 1 <= MAX_ANALYTICS_PLAYERS:
        gmax = maximalize(add_common_player(gamma, extra))
        x = sum(1 for s in gmax.sets if extra in s)
        naive = r + (r - 1) * x
    leaves = _leaf_objects(plan.root)
    home_ids = tuple(i for i, leaf in enumerate(leaves) if leaf.owner == DEALER)
    important = tuple(i for i in home_ids if importance_witness(plan, i) is not None)
    return HomeShareReport(r, lam, x, naive, r, lam - 1, extra, important, home_ids, gmax)


def analyze(gamma: AccessStructure) -> dict:
    """Everything the analysis report needs, as JSON-ready values."""
    graph = build_as_graph(gamma)
    partition = min_clique_partition(graph, heuristic=True)
    out = {
        "gamma": gamma.to_json(),
        "compact": gamma.compact(),
        "no_cloning": check_no_cloning(gamma),
        "graph": graph.to_json(),
        "lambda": partition.size,
        "lambda_exact": partition.exact,
        "partition": [[list(gamma.sets[v]) for v in cls] for cls in partition.classes],
        "components": len(graph.components()),
    }
    if out["no_cloning"] and len(gamma.players) <= MAX_ANALYTICS_PLAYERS:
        gmax = maximalize(gamma)
        out["gamma_max"] = {"sets": [list(s) for s in gmax.sets], **gmax.meta}
    else:
        out["gamma_max"] = None
        out["gamma_max_note"] = (
            "no maximal structure: two authorized sets are disjoint"
            if not out["no_cloning"] else "too many players to enumerate"
        )
    plan = build_aqss_plan(gamma, DEALER_ASSISTED)
    out["home_shares"] = home_share_analytics(gamma, plan).to_json()
    return out
