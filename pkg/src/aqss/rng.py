"""Seeded, splittable random streams.

Every stochastic step takes an explicit ``numpy.random.Generator``. Streams are
derived from one integer seed plus a path of string labels, so adding a new
labelled step never shifts the randomness seen by existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label: str | int) -> int:
    if isinstance(label, int):
        return label
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, *labels: str | int) -> np.random.Generator:
    """Return a Philox generator for ``seed`` and the given label path."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(_label_key(x) for x in labels))
    return np.random.Generator(np.random.Philox(seq))


def child(rng: np.random.Generator, *labels: str | int) -> np.random.Generator:
    """Derive a labelled sub-stream from an existing generator.

    The parent is advanced by one draw, so derivation is itself deterministic.
    """
    base = int(rng.integers(0, 2**63 - 1))
    return stream(base, *labels)


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if rng is None:
        return stream(0)
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(int(rng))
