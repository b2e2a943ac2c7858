"""Access structures: parsing, canonical form, overlap graph, maximalization."""

from __future__ import annotations

import itertools
import json
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, StructureError

DEALER = "dealer"
MAX_ENUM_PLAYERS = 20


@dataclass(frozen=True)
class AccessStructure:
    """A monotone family of authorized player sets, kept as its minimal sets.

    ``players`` fixes the universe and the canonical order. ``sets`` are the
    minimal authorized sets, each a tuple in player order, sorted by the
    player-index tuple.
    """

    players: tuple[str, ...]
    sets: tuple[tuple[str, ...], ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not self.sets:
            raise StructureError("access structure has no authorized sets")
        if len(set(self.players)) != len(self.players):
            raise StructureError("duplicate player name")
        if DEALER in self.players:
            raise StructureError(f"{DEALER!r} is reserved for the share dealer")
        known = set(self.players)
        for s in self.sets:
            if not s:
                raise StructureError("empty authorized set")
            missing = set(s) - known
            if missing:
                raise StructureError(f"players {sorted(missing)} not in the universe")

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[str]], players: Sequence[str] | None = None,
                  meta: dict | None = None) -> AccessStructure:
        """Canonicalize: keep minimal sets only, order deterministically."""
        raw = [frozenset(s) for s in sets]
        if not raw:
            raise StructureError("access structure has no authorized sets")
        if any(not s for s in raw):
            raise StructureError("empty authorized set")
        if players is None:
            players = sorted(set().union(*raw))
        players = tuple(players)
        rank = {p: i for i, p in enumerate(players)}
        missing = set().union(*raw) - set(rank)
        if missing:
            raise StructureError(f"players {sorted(missing)} not in the universe")
        uniq = set(raw)
        minimal = [s for s in uniq if not any(t < s for t in uniq)]
        ordered = sorted(tuple(sorted(s, key=rank.__getitem__)) for s in minimal)
        ordered.sort(key=lambda s: [rank[p] for p in s])
        return cls(players, tuple(ordered), dict(meta or {}))

    # ---------------------------------------------------------------- views

    @property
    def r(self) -> int:
        return len(self.sets)

    def masks(self) -> list[int]:
        rank = {p: i for i, p in enumerate(self.players)}
        return [sum(1 << rank[p] for p in s) for s in self.sets]

    def is_authorized(self, coalition: Iterable[str]) -> bool:
        c = set(coalition)
        return any(c.issuperset(s) for s in self.sets)

    def compact(self) -> str:
        if all(len(p) == 1 for p in self.players):
            return "{" + ", ".join("".join(s) for s in self.sets) + "}"
        return json.dumps(self.to_json())

    def to_json(self) -> dict:
        return {"players": list(self.players), "sets": [list(s) for s in self.sets]}

    def __str__(self):
        return self.compact()


def _parse_compact(text: str) -> list[list[str]]:
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    skip()
    if pos >= n or text[pos] != "{":
        raise ParseError("expected '{'", pos)
    pos += 1
    skip()
    if pos < n and text[pos] == "}":
        raise ParseError("empty structure", pos)
    sets: list[list[str]] = []
    while True:
        skip()
        start = pos
        while pos < n and text[pos].isalpha() and text[pos].isupper():
            pos += 1
        if pos == start:
            if pos < n and text[pos] in ",}":
                raise ParseError("empty set inside structure", pos)
            raise ParseError("expected an uppercase player letter", pos)
        sets.append(list(text[start:pos]))
        skip()
        if pos >= n:
            raise ParseError("unterminated structure, expected ',' or '}'", pos)
        if text[pos] == ",":
            pos += 1
            continue
        if text[pos] == "}":
            pos += 1
            break
        raise ParseError(f"unexpected character {text[pos]!r}", pos)
    skip()
    if pos != n:
        raise ParseError("trailing characters after '}'", pos)
    return sets


def parse_access_structure(text: str) -> AccessStructure:
    """Parse ``{ABC, BD, EFG}`` or ``{"players": [...], "sets": [[...], ...]}``.

    A bare JSON list of lists is accepted too. The result is canonical.
    """
    stripped = text.strip()
    if stripped.startswith("[") or re.match(r'\{\s*"', stripped):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from None
        if isinstance(data, list):
            data = {"sets": data}
        sets = data.get("sets")
        if not isinstance(sets, list) or not sets:
            raise ParseError("empty structure")
        for s in sets:
            if not isinstance(s, list) or not all(isinstance(p, str) and p for p in s):
                raise ParseError("each set must be a list of non-empty player names")
            if not s:
                raise ParseError("empty set inside structure")
        players = data.get("players")
        return AccessStructure.from_sets(sets, players)
    return AccessStructure.from_sets(_parse_compact(stripped))


def check_no_cloning(gamma: AccessStructure) -> bool:
    """True iff every pair of authorized sets overlaps."""
    masks = gamma.masks()
    return all(a & b for a, b in itertools.combinations(masks, 2))


# -------------------------------------------------------------------- graph


@dataclass(frozen=True)
class ASGraph:
    """Overlap graph: one vertex per authorized set, edges between overlapping sets."""

    n: int
    edges: frozenset[tuple[int, int]]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        for j, k in self.edges:
            if not (0 <= j < k < self.n):
                raise ValueError(f"bad edge {(j, k)}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], names=()) -> ASGraph:
        norm = frozenset((min(j, k), max(j, k)) for j, k in edges if j != k)
        return cls(n, norm, tuple(names))

    def adjacency(self) -> list[int]:
        """Neighbour bitmask per vertex."""
        adj = [0] * self.n
        for j, k in self.edges:
            adj[j] |= 1 << k
            adj[k] |= 1 << j
        return adj

    def is_complete(self) -> bool:
        return len(self.edges) == self.n * (self.n - 1) // 2

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = 0
        out = []
        for v in range(self.n):
            if seen >> v & 1:
                continue
            comp, frontier = 0, 1 << v
            while frontier:
                comp |= frontier
                nxt = 0
                for u in _bits(frontier):
                    nxt |= adj[u]
                frontier = nxt & ~comp
            seen |= comp
            out.append(list(_bits(comp)))
        return out

    def to_json(self) -> dict:
        return {"vertices": self.n, "edges": sorted(list(e) for e in self.edges)}


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def build_as_graph(gamma: AccessStructure) -> ASGraph:
    masks = gamma.masks()
    edges = [(j, k) for j, k in itertools.combinations(range(len(masks)), 2) if masks[j] & masks[k]]
    names = tuple("".join(s) if all(len(p) == 1 for p in s) else "+".join(s) for s in gamma.sets)
    return ASGraph.from_edges(len(masks), edges, names)


# ------------------------------------------------------------ maximalization


def _authorized_table(masks: Sequence[int], n_players: int) -> np.ndarray:
    size = 1 << n_players
    auth = np.zeros(size, dtype=bool)
    universe = np.arange(size, dtype=np.int64)
    for m in masks:
        auth |= (universe & m) == m
    return auth


def _minimal_sets(auth: np.ndarray, n_players: int) -> list[int]:
    out = []
    for u in np.flatnonzero(auth):
        u = int(u)
        if all(not auth[u & ~(1 << i)] for i in _bits(u)):
            out.append(u)
    return out


def maximalize(gamma: AccessStructure) -> AccessStructure:
    """Extend ``gamma`` to a maximal structure: every unauthorized set's
    complement is authorized, and authorized sets still pairwise overlap.

    Greedy and deterministic: candidate sets are visited largest first (then
    in canonical player order); an unauthorized candidate whose complement is
    also unauthorized is added with its supersets. Largest-first adds the
    weakest possible sets, so the result stays as close to ``gamma`` as the
    greedy rule allows. The result is not unique in general; the rule used is
    recorded in ``meta``.

    Raises StructureError if ``gamma`` has two disjoint authorized sets.
    """
    if not check_no_cloning(gamma):
        raise StructureError("no maximal structure exists: two authorized sets are disjoint")
    n = len(gamma.players)
    if n > MAX_ENUM_PLAYERS:
        raise StructureError(f"maximalize enumerates subsets; {n} players exceeds {MAX_ENUM_PLAYERS}")
    full = (1 << n) - 1
    auth = _authorized_table(gamma.masks(), n)
    universe = np.arange(1 << n, dtype=np.int64)
    popcount = np.array([bin(u).count("1") for u in range(1 << n)])
    # largest first; among equal sizes, lexicographic over the player-index tuple
    candidates = sorted(
        range(1 << n),
        key=lambda u: (-popcount[u], [i for i in range(n) if u >> i & 1]),
    )
    added = []
    for u in candidates:
        if auth[u] or auth[full & ~u]:
            continue
        auth |= (universe & u) == u
        added.append(u)
    sets = [[gamma.players[i] for i in _bits(m)] for m in _minimal_sets(auth, n)]
    meta = {
        "rule": "greedy, largest candidate first, canonical order within a size",
        "added": len(added),
    }
    return AccessStructure.from_sets(sets, gamma.players, meta)


def is_maximal(gamma: AccessStructure) -> bool:
    """Exhaustive check of the fixpoint property (small universes only)."""
    n = len(gamma.players)
    full = (1 << n) - 1
    auth = _authorized_table(gamma.masks(), n)
    return all(auth[u] or auth[full & ~u] for u in range(1 << n))


def fresh_player(gamma: AccessStructure, preferred: str = "X") -> str:
    """A player name not already in the universe."""
    if preferred not in gamma.players:
        return preferred
    if all(len(p) == 1 for p in gamma.players):
        for c in "XYZWVUTSRQPONMLKJIHGFEDCBA":
            if c not in gamma.players:
                return c
    i = 1
    while f"{preferred}{i}" in gamma.players:
        i += 1
    return f"{preferred}{i}"


def add_common_player(gamma: AccessStructure, name: str) -> AccessStructure:
    """The structure with ``name`` added to every authorized set."""
    return AccessStructure.from_sets(
        [list(s) + [name] for s in gamma.sets], list(gamma.players) + [name]
    )
