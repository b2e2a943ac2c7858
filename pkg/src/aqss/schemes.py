"""Classical secret sharing and the quantum ((k, n)) polynomial threshold code.

The quantum code encodes a qudit secret s in the leading (degree k-1)
coefficient of a random polynomial f of degree < k over GF(q) and hands out
f(0), f(1), ..., f(2k-2). Any k shares fix f; fewer than k reveal nothing.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import gf
from .access import AccessStructure
from .errors import UnauthorizedError
from .quantum import ENV, QuditRegister, apply_basis_permutation, apply_isometry

gf_interpolate = gf.interpolate


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int

    def __post_init__(self):
        if not gf.is_prime(self.q):
            raise ValueError(f"GF({self.q}): q must be prime")
        object.__setattr__(self, "value", self.value % self.q)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.q != self.q:
                raise ValueError("elements from different fields")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElement(self.value + self._coerce(other), self.q)

    def __sub__(self, other):
        return FieldElement(self.value - self._coerce(other), self.q)

    def __mul__(self, other):
        return FieldElement(self.value * self._coerce(other), self.q)

    def __truediv__(self, other):
        return FieldElement(self.value * gf.inv(self._coerce(other), self.q), self.q)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.q)

    def __int__(self):
        return self.value

    __index__ = __int__


# ------------------------------------------------------------------ Shamir


@dataclass(frozen=True)
class ClassicalShare:
    index: int
    value: int
    field: int

    def to_json(self) -> dict:
        return {"index": self.index, "value": self.value, "field": self.field}

    @classmethod
    def from_json(cls, data: dict) -> ClassicalShare:
        return cls(int(data["index"]), int(data["value"]), int(data["field"]))


def shamir_split(
    secret: int,
    k: int,
    n: int,
    q: int,
    rng: np.random.Generator | None = None,
    *,
    coefficients: Sequence[int] | None = None,
) -> list[ClassicalShare]:
    """Shares f(1), ..., f(n) of a random f with f(0) = secret, deg f < k.

    ``coefficients`` fixes the k - 1 blinding coefficients (lowest degree
    first) instead of drawing them from ``rng``.
    """
    if not gf.is_prime(q):
        raise ValueError(f"q = {q} is not prime")
    if not 1 <= k <= n < q:
        raise ValueError(f"need 1 <= k <= n < q, got k={k}, n={n}, q={q}")
    if coefficients is None:
        if rng is None:
            raise ValueError("rng or coefficients required")
        coefficients = [int(c) for c in rng.integers(0, q, size=k - 1)]
    if len(coefficients) != k - 1:
        raise ValueError(f"expected {k - 1} blinding coefficients")
    poly = [int(secret) % q] + [int(c) % q for c in coefficients]
    return [ClassicalShare(x, gf.poly_eval(poly, x, q), q) for x in range(1, n + 1)]


def shamir_reconstruct(shares: Sequence[ClassicalShare], k: int) -> int:
    if len({s.index for s in shares}) < k:
        raise ValueError(f"need {k} distinct shares, got {len({s.index for s in shares})}")
    fields = {s.field for s in shares}
    if len(fields) != 1:
        raise ValueError("shares come from different fields")
    (q,) = fields
    chosen = sorted(shares, key=lambda s: s.index)[:k]
    return gf.interpolate([(s.index, s.value) for s in chosen], q)[0]


# ------------------------------------------------------ monotone (OR of ANDs)


Bits = np.ndarray  # dtype uint8, values 0/1


def as_bits(bits: Iterable[int] | str) -> Bits:
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    arr = np.asarray(list(bits), dtype=np.uint8)
    if np.any(arr > 1):
        raise ValueError("bitstring entries must be 0 or 1")
    return arr


def bits_to_str(bits: Bits) -> str:
    return "".join(str(int(b)) for b in bits)


def classical_monotone_share(
    gamma: AccessStructure, key, rng: np.random.Generator
) -> dict[str, dict[int, Bits]]:
    """Share ``key`` so that exactly the coalitions authorized by ``gamma``
    recover it.

    Each minimal set alpha_j gets an independent XOR split of the key
    (AND), and the splits are handed out side by side (OR). A player's
    bundle maps set index j to its piece for alpha_j.
    """
    key = as_bits(key)
    bundles: dict[str, dict[int, Bits]] = {p: {} for p in gamma.players}
    for j, alpha in enumerate(gamma.sets):
        pads = [rng.integers(0, 2, size=key.size, dtype=np.uint8) for _ in alpha[1:]]
        last = key.copy()
        for pad in pads:
            last ^= pad
        for player, piece in zip(alpha, pads + [last]):
            bundles[player][j] = piece
    return bundles


def classical_monotone_reconstruct(
    bundles: Mapping[str, Mapping[int, Bits]], coalition: Iterable[str], gamma: AccessStructure
) -> Bits:
    members = set(coalition)
    for j, alpha in enumerate(gamma.sets):
        if members.issuperset(alpha):
            out = None
            for player in alpha:
                piece = np.asarray(bundles[player][j], dtype=np.uint8)
                out = piece.copy() if out is None else out ^ piece
            return out
    raise UnauthorizedError(members)


# -------------------------------------------------------------- quantum code


@dataclass(frozen=True)
class QtsParams:
    """A ((k, n)) quantum threshold scheme over GF(q).

    The code is always built with 2k - 1 shares; when n < 2k - 1 the last
    2k - 1 - n shares go to the environment.
    """

    k: int
    n: int
    q: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got (({self.k},{self.n}))")
        if self.n > 2 * self.k - 1:
            raise ValueError(
                f"(({self.k},{self.n})) violates no-cloning: quantum threshold needs k > n/2"
            )
        if not gf.is_prime(self.q):
            raise ValueError(f"q = {self.q} is not prime")
        if self.q < self.size:
            raise ValueError(f"q = {self.q} too small for {self.size} evaluation points")

    @property
    def size(self) -> int:
        """Number of shares actually produced (2k - 1)."""
        return 2 * self.k - 1

    @property
    def points(self) -> tuple[int, ...]:
        return tuple(range(self.size))


def qts_encode_matrix(params: QtsParams) -> np.ndarray:
    """Isometry from one q-dimensional site to 2k - 1 q-dimensional sites.

    Column s is q^-(k-1)/2 times the sum over lower coefficients c of
    |f(0) f(1) ... f(2k-2)>, f(x) = c_0 + ... + c_{k-2} x^{k-2} + s x^{k-1}.
    """
    k, q, size = params.k, params.q, params.size
    xs = np.arange(size, dtype=np.int64)
    powers = np.array([[pow(int(x), j, q) for j in range(k)] for x in xs], dtype=np.int64)
    lower = np.array(list(itertools.product(range(q), repeat=k - 1)), dtype=np.int64)
    lower = lower.reshape(-1, k - 1)
    weights = q ** np.arange(size - 1, -1, -1, dtype=np.int64)
    mat = np.zeros((q**size, q), dtype=float)
    amp = q ** (-(k - 1) / 2)
    for s in range(q):
        coeffs = np.concatenate([lower, np.full((len(lower), 1), s)], axis=1)
        values = coeffs @ powers.T % q
        mat[values @ weights, s] = amp
    return mat


@dataclass(frozen=True)
class QtsShares:
    """Where the 2k - 1 shares of one encoding live in the register."""

    params: QtsParams
    sites: tuple[int, ...]

    def held(self, points: Iterable[int]) -> dict[int, int]:
        return {p: self.sites[p] for p in points}


def qts_encode(
    reg: QuditRegister,
    site: int,
    params: QtsParams,
    labels: Sequence[str] | None = None,
) -> tuple[QuditRegister, QtsShares]:
    """Encode the secret on ``site`` into 2k - 1 shares.

    Share 0 replaces ``site``; shares 1..2k-2 are appended. ``labels`` names
    the owners of the n real shares (in point order); surplus shares are
    labeled environment.
    """
    if reg.dims[site] != params.q:
        raise ValueError(f"secret site has dimension {reg.dims[site]}, expected q = {params.q}")
    size = params.size
    if labels is None:
        labels = [reg.labels[site]] * params.n
    labels = list(labels)
    if len(labels) != params.n:
        raise ValueError(f"expected {params.n} share labels")
    labels += [ENV] * (size - params.n)
    start = reg.num_sites
    out = apply_isometry(reg, site, qts_encode_matrix(params), [params.q] * size, labels[1:])
    out = out.with_label(site, labels[0])
    return out, QtsShares(params, (site,) + tuple(range(start, start + size - 1)))


def qts_decode_table(params: QtsParams, points: Sequence[int]) -> np.ndarray:
    """Linear map over GF(q) taking held values y_H to (s, f(x_U)).

    Row 0 extracts the leading coefficient; the remaining rows evaluate f at
    the unheld points. Both are linear in y_H through the inverse Vandermonde
    matrix of the held points.
    """
    k, q = params.k, params.q
    held = list(points)
    unheld = [x for x in params.points if x not in held][: k - 1]
    v_inv = gf.mat_inv(gf.vandermonde(held, k, q), q)
    lead = np.zeros((1, k), dtype=np.int64)
    lead[0, k - 1] = 1
    rows = np.concatenate([lead, gf.vandermonde(unheld, k, q)], axis=0) if unheld else lead
    return rows @ v_inv % q


def qts_reconstruct(
    reg: QuditRegister, params: QtsParams, held: Mapping[int, int]
) -> tuple[QuditRegister, int]:
    """Move the secret onto one held site without measuring.

    ``held`` maps evaluation points to the register sites that carry them.
    The first k points (in increasing order) are used. Returns the new
    register and the output site, which then holds the secret in a product
    with every other site.
    """
    k, q = params.k, params.q
    points = sorted(held)
    if len(points) < k:
        raise ValueError(f"(({k},{params.n})) needs {k} shares, got {len(points)}")
    if any(p not in params.points for p in points):
        raise ValueError(f"evaluation points {points} not in this encoding")
    points = points[:k]
    sites = [held[p] for p in points]
    if any(reg.dims[s] != q for s in sites):
        raise ValueError("share sites do not have dimension q")
    table = qts_decode_table(params, points)
    digits = np.array(list(itertools.product(range(q), repeat=k)), dtype=np.int64).reshape(-1, k)
    images = digits @ table.T % q
    weights = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    perm = images @ weights
    return apply_basis_permutation(reg, sites, perm), sites[0]


def min_field(k: int, n: int, secret_dim: int = 2) -> int:
    """Smallest prime that can carry a ((k, n)) code and the secret."""
    return gf.next_prime(max(2 * k - 1, secret_dim, 2))


def secret_vector(secret: QuditRegister | Sequence[complex], q: int) -> np.ndarray:
    """Pad a one-site secret to dimension q."""
    if isinstance(secret, QuditRegister):
        if secret.num_sites != 1:
            raise ValueError("secret must be a single site")
        vec = secret.amplitudes
    else:
        vec = np.asarray(secret, dtype=complex)
    if vec.size > q:
        raise ValueError(f"secret dimension {vec.size} exceeds q = {q}")
    out = np.zeros(q, dtype=complex)
    out[: vec.size] = vec
    norm = math.sqrt(float(np.sum(np.abs(out) ** 2)))
    if abs(norm - 1) > 1e-10:
        raise ValueError("secret is not normalized")
    return out
