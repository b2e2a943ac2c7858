"""Binary linear block codes with exhaustive checks and syndrome decoding."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

MAX_EXHAUSTIVE = 16


def gf2_rank(m: np.ndarray) -> int:
    m = (np.asarray(m, dtype=np.uint8) % 2).copy()
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def _to_int(bits: np.ndarray) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


@dataclass(frozen=True)
class DecodeResult:
    codeword: np.ndarray
    message: np.ndarray
    error_weight: int
    within_radius: bool


@dataclass(frozen=True)
class LinearCode:
    """C(m, k_c, d) over GF(2) from a generator G (k_c x m) and parity-check
    matrix H ((m - k_c) x m). The minimum distance is computed exhaustively."""

    generator: np.ndarray
    parity_check: np.ndarray
    name: str = "custom"
    d: int = field(init=False)
    _leaders: dict = field(init=False, repr=False, compare=False)
    _messages: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=np.uint8) % 2
        h = np.asarray(self.parity_check, dtype=np.uint8) % 2
        object.__setattr__(self, "generator", g)
        object.__setattr__(self, "parity_check", h)
        k, m = g.shape
        if h.shape != (m - k, m):
            raise ValueError(f"parity-check shape {h.shape}, expected {(m - k, m)}")
        if m > MAX_EXHAUSTIVE:
            raise ValueError(f"block length {m} > {MAX_EXHAUSTIVE}: exhaustive checks unavailable")
        if gf2_rank(g) != k:
            raise ValueError("generator rows are not independent")
        if gf2_rank(h) != m - k:
            raise ValueError("parity-check rows are not independent")
        if np.any(g @ h.T % 2):
            raise ValueError("G H^T != 0")
        messages = {}
        weights = []
        for msg in itertools.product((0, 1), repeat=k):
            word = np.array(msg, dtype=np.uint8) @ g % 2
            messages[_to_int(word)] = np.array(msg, dtype=np.uint8)
            if any(msg):
                weights.append(int(word.sum()))
        object.__setattr__(self, "d", min(weights) if weights else m)
        object.__setattr__(self, "_messages", messages)
        leaders: dict[int, np.ndarray] = {}
        for w in range(m + 1):
            for pos in itertools.combinations(range(m), w):
                e = np.zeros(m, dtype=np.uint8)
                e[list(pos)] = 1
                leaders.setdefault(_to_int(h @ e % 2), e)
            if len(leaders) == 2 ** (m - k):
                break
        object.__setattr__(self, "_leaders", leaders)

    @property
    def m(self) -> int:
        return self.generator.shape[1]

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def t(self) -> int:
        """Guaranteed correction radius floor((d - 1) / 2)."""
        return (self.d - 1) // 2

    def encode(self, message) -> np.ndarray:
        return np.asarray(message, dtype=np.uint8) @ self.generator % 2

    def syndrome(self, word) -> np.ndarray:
        return self.parity_check @ np.asarray(word, dtype=np.uint8) % 2

    def coset_leader(self, syndrome) -> np.ndarray:
        return self._leaders[_to_int(syndrome)].copy()

    def message_of(self, codeword) -> np.ndarray:
        return self._messages[_to_int(codeword)].copy()

    def decode(self, word) -> DecodeResult:
        """Nearest codeword by syndrome lookup."""
        word = np.asarray(word, dtype=np.uint8)
        e = self.coset_leader(self.syndrome(word))
        cw = word ^ e
        w = int(e.sum())
        return DecodeResult(cw, self.message_of(cw), w, w <= self.t)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "m": self.m,
            "k": self.k,
            "d": self.d,
            "generator": self.generator.tolist(),
            "parity_check": self.parity_check.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> LinearCode:
        return cls(np.array(data["generator"]), np.array(data["parity_check"]), data.get("name", "custom"))


def hamming74() -> LinearCode:
    """Systematic Hamming(7,4,3): G = [I | P], H = [P^T | I]."""
    p = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], dtype=np.uint8)
    g = np.concatenate([np.eye(4, dtype=np.uint8), p], axis=1)
    h = np.concatenate([p.T, np.eye(3, dtype=np.uint8)], axis=1)
    return LinearCode(g, h, "hamming(7,4,3)")
