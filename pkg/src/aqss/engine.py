"""Quantum execution of share plans, leakage certification, and the
one-time-pad (encrypted home share) variant.

A plan node ((k, n)) is realized as the polynomial code with 2k - 1 shares,
the surplus going to the environment. ((m, m)) nodes with m >= 3 are built as
a chain of ((2, 2)) codes, AND(c1, AND(c2, ...)), which has the same access
semantics and keeps the field at q = 3 instead of q >= 2m - 1.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import gf
from .access import DEALER, AccessStructure
from .errors import AuthorizedError, StructureError, UnauthorizedError
from .plan import Leaf, SharePlan, Threshold, evaluate_coalition
from .quantum import (
    ENV,
    PauliKey,
    QuditRegister,
    apply_isometry,
    prepare,
    qotp_decrypt,
    qotp_encrypt,
    reduced_density,
    reduced_trace_distance,
)
from .schemes import (
    QtsParams,
    as_bits,
    bits_to_str,
    classical_monotone_reconstruct,
    classical_monotone_share,
    qts_encode,
    qts_reconstruct,
    secret_vector,
)

FIDELITY_TOL = 1e-9
LEAKAGE_TOL = 1e-9


# ------------------------------------------------------------- realization


@dataclass(frozen=True)
class RLeaf:
    leaf_id: int
    owner: str


@dataclass(frozen=True)
class REnv:
    pass


@dataclass(frozen=True)
class RCode:
    k: int
    children: tuple  # exactly 2k - 1 entries; surplus are REnv

    @property
    def n(self) -> int:
        return sum(not isinstance(c, REnv) for c in self.children)


def _pad(k: int, children: list) -> RCode:
    return RCode(k, tuple(children) + (REnv(),) * (2 * k - 1 - len(children)))


def realize(plan: SharePlan | Threshold | Leaf):
    """Map plan nodes to codes that can be built with the polynomial scheme."""
    root = plan.root if isinstance(plan, SharePlan) else plan
    counter = iter(range(10**9))

    def walk(node):
        if isinstance(node, Leaf):
            if node.owner == ENV:
                raise StructureError(f"{ENV!r} is reserved for environment sites")
            return RLeaf(next(counter), node.owner)
        kids = [walk(c) for c in node.children]
        k, n = node.k, node.n
        if n > 2 * k - 1:
            raise StructureError(f"(({k},{n})) cannot be realized quantumly (needs k > n/2)")
        if k == n == 1:
            return kids[0]
        if k == n:
            chain = _pad(2, kids[-2:])
            for c in reversed(kids[:-2]):
                chain = _pad(2, [c, chain])
            return chain
        return _pad(k, kids)

    return walk(root)


def _codes(node) -> Iterable[RCode]:
    if isinstance(node, RCode):
        yield node
        for c in node.children:
            yield from _codes(c)


def field_size(plan: SharePlan, secret_dim: int = 2) -> int:
    """Smallest prime q >= max(secret dimension, 2k - 1 over realized codes)."""
    need = max([secret_dim, 2] + [2 * c.k - 1 for c in _codes(realize(plan))])
    return gf.next_prime(need)


def _satisfied(node, members: frozenset) -> bool:
    if isinstance(node, RLeaf):
        return node.owner in members
    if isinstance(node, REnv):
        return False
    return sum(_satisfied(c, members) for c in node.children) >= node.k


# -------------------------------------------------------------- allocation


@dataclass(frozen=True)
class _Encoded:
    code: RCode
    params: QtsParams
    sites: tuple[int, ...]
    children: tuple


@dataclass(frozen=True)
class ShareAllocation:
    register: QuditRegister
    ownership: tuple[str, ...]
    plan: SharePlan
    q: int
    leaf_sites: tuple[int, ...]
    tree: object = field(repr=False)
    secret: np.ndarray | None = field(default=None, repr=False, compare=False)

    def sites_of(self, coalition: Iterable[str]) -> list[int]:
        members = set(coalition)
        return [s for s, owner in enumerate(self.ownership) if owner in members and owner != ENV]

    def environment_sites(self) -> list[int]:
        return [s for s, owner in enumerate(self.ownership) if owner == ENV]

    def plan_id(self) -> str:
        text = json.dumps(self.plan.root.to_json(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def manifest(self) -> dict:
        parties: dict[str, list[int]] = {}
        for s, owner in enumerate(self.ownership):
            parties.setdefault(owner, []).append(s)
        return {
            "plan_id": self.plan_id(),
            "q": self.q,
            "sites": len(self.ownership),
            "terms": self.register.num_terms,
            "ownership": [{"site": s, "owner": o} for s, o in enumerate(self.ownership)],
            "by_party": {p: v for p, v in sorted(parties.items())},
            "leaf_sites": list(self.leaf_sites),
        }


def _embed(secret: QuditRegister | Sequence[complex], q: int) -> tuple[QuditRegister, np.ndarray]:
    vec = secret_vector(secret, q)
    return prepare([q], vec, [DEALER]), vec


def quantum_share(
    plan: SharePlan,
    secret: QuditRegister | Sequence[complex],
    rng: np.random.Generator | None = None,
    *,
    q: int | None = None,
) -> ShareAllocation:
    """Encode ``secret`` down the plan tree.

    The encoding is a fixed isometry, so ``rng`` is not consumed; it is
    accepted so every engine entry point has the same shape.
    """
    dim = secret.dims[0] if isinstance(secret, QuditRegister) else len(secret)
    if q is None:
        q = field_size(plan, dim)
    elif q < field_size(plan, dim):
        raise ValueError(f"q = {q} too small for this plan")
    reg, vec = _embed(secret, q)
    leaf_sites: dict[int, int] = {}

    def encode(reg, site, node):
        if isinstance(node, RLeaf):
            leaf_sites[node.leaf_id] = site
            return reg.with_label(site, node.owner), node
        if isinstance(node, REnv):
            return reg.with_label(site, ENV), node
        params = QtsParams(node.k, len(node.children), q)
        reg, shares = qts_encode(reg, site, params)
        kids = []
        for child, s in zip(node.children, shares.sites):
            reg, enc = encode(reg, s, child)
            kids.append(enc)
        return reg, _Encoded(node, params, shares.sites, tuple(kids))

    reg, tree = encode(reg, 0, realize(plan))
    ids = tuple(leaf_sites[i] for i in range(len(leaf_sites)))
    return ShareAllocation(reg, reg.labels, plan, q, ids, tree, vec)


def _sat_enc(node, members) -> bool:
    if isinstance(node, _Encoded):
        return _satisfied(node.code, members)
    return _satisfied(node, members)


@dataclass(frozen=True)
class Reconstruction:
    register: QuditRegister
    output_site: int
    fidelity: float | None

    def state(self) -> np.ndarray:
        """Dominant eigenvector of the output site (pure when disentangled)."""
        rho = reduced_density(self.register, [self.output_site]).matrix
        w, v = np.linalg.eigh(rho)
        return v[:, -1]


def quantum_reconstruct(alloc: ShareAllocation, coalition: Iterable[str]) -> Reconstruction:
    """Undo the encoding on the coalition's sites only; no measurement.

    Raises UnauthorizedError before touching the register if the coalition
    does not satisfy the plan.
    """
    members = frozenset(coalition)
    if not evaluate_coalition(alloc.plan, members):
        raise UnauthorizedError(members)
    reg = alloc.register

    def undo(node):
        nonlocal reg
        if isinstance(node, RLeaf):
            return alloc.leaf_sites[node.leaf_id]
        held: dict[int, int] = {}
        for point, child in enumerate(node.children):
            if len(held) == node.params.k:
                break
            if isinstance(child, (RLeaf, _Encoded)) and _sat_enc(child, members):
                held[point] = undo(child)
        reg, out = qts_reconstruct(reg, node.params, held)
        return out

    out = undo(alloc.tree)
    fid = None
    if alloc.secret is not None:
        rho = reduced_density(reg, [out]).matrix
        fid = float(np.real(alloc.secret.conj() @ rho @ alloc.secret))
        fid = min(max(fid, 0.0), 1.0)
    return Reconstruction(reg, out, fid)


# ----------------------------------------------------------------- leakage


@dataclass(frozen=True)
class LeakageReport:
    coalition: tuple[str, ...]
    sites: tuple[int, ...]
    trace_distance: float
    pairs: int = 1

    @property
    def ok(self) -> bool:
        return self.trace_distance <= LEAKAGE_TOL

    def to_json(self) -> dict:
        return {
            "coalition": list(self.coalition),
            "sites": list(self.sites),
            "trace_distance": self.trace_distance,
            "secret_pairs": self.pairs,
            "ok": self.ok,
        }


def leakage_between(a: ShareAllocation, b: ShareAllocation, coalition: Iterable[str]) -> float:
    """Trace distance of the coalition's reduced states in two allocations."""
    sites = a.sites_of(coalition)
    if not sites:
        return 0.0
    return reduced_trace_distance(a.register, b.register, sites)


def _sorted_coalition(plan: SharePlan, coalition: Iterable[str]) -> tuple[str, ...]:
    order = {p: i for i, p in enumerate(plan.parties())}
    return tuple(sorted(set(coalition), key=lambda p: (order.get(p, len(order)), p)))


def leakage_report(
    plan: SharePlan,
    coalition: Iterable[str],
    secret_a,
    secret_b,
    rng: np.random.Generator | None = None,
) -> LeakageReport:
    """How well the coalition can tell ``secret_a`` from ``secret_b``."""
    members = frozenset(coalition)
    if evaluate_coalition(plan, members):
        raise AuthorizedError(f"coalition {sorted(members)} can reconstruct; leakage is moot")
    dim = max(len(secret_vector_raw(secret_a)), len(secret_vector_raw(secret_b)))
    q = field_size(plan, dim)
    a = quantum_share(plan, secret_a, rng, q=q)
    b = quantum_share(plan, secret_b, rng, q=q)
    return LeakageReport(
        _sorted_coalition(plan, members), tuple(a.sites_of(members)), leakage_between(a, b, members)
    )


def secret_vector_raw(secret) -> np.ndarray:
    if isinstance(secret, QuditRegister):
        return secret.amplitudes
    return np.asarray(secret, dtype=complex)


def certification_pairs(d: int = 2) -> list[tuple[np.ndarray, np.ndarray]]:
    """Two orthogonal basis secrets and one orthogonal superposition pair."""
    e0, e1 = np.eye(d, dtype=complex)[:2]
    plus = (e0 + e1) / math.sqrt(2)
    minus = (e0 - e1) / math.sqrt(2)
    return [(e0, e1), (plus, minus)]


def certify_leakage(plan: SharePlan, coalition: Iterable[str], d: int = 2) -> LeakageReport:
    """Worst trace distance over the certification secret pairs."""
    members = frozenset(coalition)
    reports = [leakage_report(plan, members, a, b) for a, b in certification_pairs(d)]
    worst = max(reports, key=lambda r: r.trace_distance)
    return LeakageReport(worst.coalition, worst.sites, worst.trace_distance, len(reports))


# ------------------------------------------------------ encrypted home share


def _value_bits(d: int) -> int:
    return max(1, math.ceil(math.log2(d)))


def key_to_bits(key: PauliKey, dims: Sequence[int]) -> np.ndarray:
    """Big-endian a then b per site, ceil(log2 d) bits each."""
    out = []
    for (a, b), d in zip(key.pairs, dims):
        w = _value_bits(d)
        for v in (a, b):
            out += [(v >> (w - 1 - i)) & 1 for i in range(w)]
    return as_bits(out)


def bits_to_key(bits: np.ndarray, dims: Sequence[int]) -> PauliKey:
    bits = [int(b) for b in bits]
    pairs, pos = [], 0
    for d in dims:
        w = _value_bits(d)
        vals = []
        for _ in range(2):
            v = 0
            for b in bits[pos : pos + w]:
                v = (v << 1) | b
            vals.append(v)
            pos += w
        pairs.append(tuple(vals))
    if pos != len(bits):
        raise ValueError("key bitstring length does not match the register")
    return PauliKey(tuple(pairs))


@dataclass(frozen=True)
class EncryptedAllocation:
    ciphertext: QuditRegister
    key_bundles: dict
    gamma: AccessStructure
    key_bits: float = 0.0

    def manifest(self) -> dict:
        return {
            "ciphertext_sites": self.ciphertext.num_sites,
            "dims": list(self.ciphertext.dims),
            "key_bits_information": self.key_bits,
            "key_bits_encoded": int(
                sum(2 * _value_bits(d) for d in self.ciphertext.dims)
            ),
            "bundles": {
                p: {str(j): bits_to_str(v) for j, v in sorted(b.items())}
                for p, b in sorted(self.key_bundles.items())
            },
        }


def encrypted_share(
    gamma: AccessStructure,
    secret: QuditRegister,
    rng: np.random.Generator,
    *,
    key: PauliKey | None = None,
) -> EncryptedAllocation:
    """Pad every secret site with a fresh generalized Pauli and share the
    classical key by ``gamma``. No overlap condition is needed.

    ``key`` overrides the random key (for tests).
    """
    sites = list(range(secret.num_sites))
    if key is None:
        key = PauliKey.random(secret.dims, rng)
    cipher = qotp_encrypt(secret, sites, key).relabel([DEALER] * len(sites))
    bundles = classical_monotone_share(gamma, key_to_bits(key, secret.dims), rng)
    info_bits = float(sum(key.bits_per_site(d) for d in secret.dims))
    return EncryptedAllocation(cipher, bundles, gamma, info_bits)


def encrypted_reconstruct(enc: EncryptedAllocation, coalition: Iterable[str]) -> QuditRegister:
    members = frozenset(coalition)
    bits = classical_monotone_reconstruct(enc.key_bundles, members - {DEALER}, enc.gamma)
    key = bits_to_key(bits, enc.ciphertext.dims)
    sites = list(range(enc.ciphertext.num_sites))
    return qotp_decrypt(enc.ciphertext, sites, key)


def state_fidelity(a: QuditRegister, b: QuditRegister) -> float:
    return float(min(abs(a.inner(b)) ** 2, 1.0))
