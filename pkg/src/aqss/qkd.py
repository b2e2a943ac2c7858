"""Two-group key distribution from shared GHZ states.

Steps, in order:
  1. EPR pairs (singlets) are made along the edges of a spanning tree and
     checked by sampling: a random subset is measured in random matched
     bases and compared.
  2. The receiving end of each pair applies XZ, turning the singlet into
     (|00> + |11>)/sqrt(2) up to a global sign.
  3. Each party reports completion to the leader.
  4. The pairs are merged into one n-party GHZ state per round.
  5. Everyone measures in the diagonal basis.
  6. The leader picks m of the 2m rounds as check rounds.
  7. Each group announces the XOR of its members' check bits; the groups
     proceed if the mismatch fraction is small enough.
  8. The remaining effective bits are reconciled with a linear code.

The channel model is a classical bit flip, with probability noise_p, on each
measured outcome. Eve, when configured, intercepts and resends the qubit
travelling along one tree edge, measuring it in a random Z/X basis.
"""

from __future__ import annotations

import math
import time
from collections import deque
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .codes import LinearCode, hamming74
from .quantum import (
    QuditRegister,
    apply_controlled_add,
    apply_x,
    apply_z,
    drop_sites,
    measure,
    prepare,
)
from .rng import stream

PAPER_LITERAL = "paper_literal"
SYNDROME = "syndrome"
RECONCILIATION_MODES = (PAPER_LITERAL, SYNDROME)
DEFAULT_SAMPLE = 128
MIN_SAMPLE = 64

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
TRIPLET = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


# ------------------------------------------------------------------ formulas


def effective_error_probability(s: int, p: float) -> float:
    """Probability that the XOR of s independently flipped bits is flipped:
    the sum over odd r of C(s, r) p^r (1 - p)^(s - r)."""
    if s < 1:
        raise ValueError("group size must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return math.fsum(math.comb(s, r) * p**r * (1 - p) ** (s - r) for r in range(1, s + 1, 2))


def effective_error_closed_form(s: int, p: float) -> float:
    return (1.0 - (1.0 - 2.0 * p) ** s) / 2.0


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def channel_capacity(P: float) -> float:
    """Ch = 1 - H(P) in bits per use of the binary symmetric channel."""
    if not 0.0 <= P <= 1.0:
        raise ValueError("P must lie in [0, 1]")
    return 1.0 - binary_entropy(P)


# -------------------------------------------------------------------- config


def chain_tree(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(n - 1))


def star_tree(n: int, centre: int = 0) -> tuple[tuple[int, int], ...]:
    return tuple((centre, i) for i in range(n) if i != centre)


@dataclass(frozen=True)
class ProtocolConfig:
    n: int = 4
    split: int = 2
    tree: tuple[tuple[int, int], ...] | None = None
    leader: int = 0
    rounds: int = 32
    noise_p: float = 0.0
    eve_edge: int | None = None
    abort_threshold: float | None = None
    code: LinearCode = field(default_factory=hamming74)
    reconciliation: str = SYNDROME
    check_sample: int = DEFAULT_SAMPLE
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 parties")
        if not 1 <= self.split < self.n:
            raise ValueError("group split must leave both groups non-empty")
        if self.tree is None:
            object.__setattr__(self, "tree", chain_tree(self.n))
        tree = tuple((int(a), int(b)) for a, b in self.tree)
        object.__setattr__(self, "tree", tree)
        _check_tree(self.n, tree)
        if not 0 <= self.leader < self.n:
            raise ValueError("leader must be a party")
        if self.rounds < 2 or self.rounds % 2:
            raise ValueError("rounds (2m) must be a positive even number")
        if not 0.0 <= self.noise_p < 0.5:
            raise ValueError("noise_p must lie in [0, 0.5)")
        if self.eve_edge is not None and not 0 <= self.eve_edge < len(tree):
            raise ValueError(f"eve edge {self.eve_edge} not in the tree")
        if self.abort_threshold is None:
            object.__setattr__(self, "abort_threshold", self.code.t / self.code.m)
        if not 0.0 < self.abort_threshold < 1.0:
            raise ValueError("abort_threshold must lie in (0, 1)")
        if self.reconciliation not in RECONCILIATION_MODES:
            raise ValueError(f"reconciliation must be one of {RECONCILIATION_MODES}")
        if self.check_sample < 1:
            raise ValueError("check_sample must be positive")

    @property
    def m(self) -> int:
        return self.rounds // 2

    @property
    def groups(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(range(self.split)), tuple(range(self.split, self.n))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "split": [self.split, self.n - self.split],
            "tree": [list(e) for e in self.tree],
            "leader": self.leader,
            "rounds": self.rounds,
            "noise_p": self.noise_p,
            "eve": None if self.eve_edge is None else {"intercept_resend": self.eve_edge},
            "abort_threshold": self.abort_threshold,
            "code": {"name": self.code.name, "m": self.code.m, "k": self.code.k, "d": self.code.d},
            "reconciliation": self.reconciliation,
            "check_sample": self.check_sample,
            "seed": self.seed,
        }


def _check_tree(n: int, tree: Sequence[tuple[int, int]]) -> None:
    if len(tree) != n - 1:
        raise ValueError(f"a spanning tree on {n} parties has {n - 1} edges, got {len(tree)}")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in tree:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise ValueError(f"bad edge {(a, b)}")
        ra, rb = find(a), find(b)
        if ra == rb:
            raise ValueError("tree has a cycle")
        parent[ra] = rb


# ---------------------------------------------------------------- message bus


@dataclass(frozen=True)
class Message:
    step: str
    sender: int
    receiver: int | str
    payload: str

    @property
    def bits(self) -> int:
        return len(self.payload)


class MessageBus:
    """In-order, authenticated classical channel with an audit log."""

    def __init__(self):
        self.log: list[Message] = []

    def send(self, step: str, sender: int, receiver: int | str, payload: str) -> None:
        self.log.append(Message(step, sender, receiver, payload))

    def broadcast(self, step: str, sender: int, payload: str) -> None:
        self.send(step, sender, "all", payload)

    def bits_by_step(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for msg in self.log:
            out[msg.step] = out.get(msg.step, 0) + msg.bits
        return out

    def count(self, step: str) -> int:
        return sum(1 for msg in self.log if msg.step == step)

    def to_json(self) -> list:
        return [[m.step, m.sender, m.receiver, m.payload] for m in self.log]


def _bitstr(bits) -> str:
    return "".join(str(int(b)) for b in bits)


# -------------------------------------------------------------- step 1: EPR


@dataclass(frozen=True)
class EdgeStats:
    edge: tuple[int, int]
    sampled: int
    errors: int
    attacked: bool
    announced: str = field(default="", repr=False)

    @property
    def estimate(self) -> float:
        return self.errors / self.sampled if self.sampled else 0.0

    def to_json(self) -> dict:
        return {
            "edge": list(self.edge),
            "sampled": self.sampled,
            "errors": self.errors,
            "estimate": self.estimate,
            "attacked": self.attacked,
        }


@dataclass(frozen=True)
class EprDistribution:
    pairs: dict  # edge index -> list of 2-qubit registers (site 0 = edge[0])
    stats: tuple[EdgeStats, ...]
    failed_edges: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.failed_edges


def _singlet() -> QuditRegister:
    return prepare([2, 2], SINGLET)


def _intercept_resend(reg: QuditRegister, rng: np.random.Generator) -> QuditRegister:
    basis = "computational" if rng.integers(2) == 0 else "diagonal"
    _, post = measure(reg, [1], basis, rng)
    return post


def distribute_epr(config: ProtocolConfig, rng: np.random.Generator | None = None) -> EprDistribution:
    """Create 2m kept pairs per edge plus ``check_sample`` test pairs.

    Test pairs are measured in a random basis shared by both ends (Z or X);
    a singlet is anticorrelated in both, so any agreement counts as an
    error. The receiving end's reading is flipped with probability noise_p.
    """
    pairs = {}
    stats = []
    failed = []
    for ei, edge in enumerate(config.tree):
        r = rng if rng is not None else stream(config.seed, "step1", ei)
        attacked = config.eve_edge == ei
        total = config.rounds + config.check_sample
        sample = set(int(i) for i in r.choice(total, size=config.check_sample, replace=False))
        kept = []
        errors = 0
        announced = []
        for i in range(total):
            reg = _singlet()
            if attacked:
                reg = _intercept_resend(reg, r)
            if i in sample:
                basis = "computational" if r.integers(2) == 0 else "diagonal"
                out, _ = measure(reg, [0, 1], basis, r)
                a, b = out.values
                if r.random() < config.noise_p:
                    b ^= 1
                errors += int(a == b)
                announced.append(f"{int(basis == 'diagonal')}{b}")
            else:
                kept.append(reg)
        st = EdgeStats(edge, config.check_sample, errors, attacked, "".join(announced))
        stats.append(st)
        if st.estimate > config.abort_threshold:
            failed.append(ei)
        pairs[ei] = kept
    return EprDistribution(pairs, tuple(stats), tuple(failed))


# ---------------------------------------------------------- step 2: triplet


def singlet_to_triplet(reg: QuditRegister, site: int = 1) -> QuditRegister:
    """Apply XZ (Z first) to one half: singlet -> -(|00> + |11>)/sqrt(2)."""
    return apply_x(apply_z(reg, site), site)


def fidelity_to(reg: QuditRegister, target: np.ndarray) -> float:
    return float(abs(np.vdot(target, reg.amplitudes)) ** 2)


# ------------------------------------------------------------- step 4: merge


def bfs_edges(n: int, tree: Sequence[tuple[int, int]], leader: int) -> list[tuple[int, int, int]]:
    """(edge index, parent, child) in breadth-first order from the leader."""
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(n)}
    for ei, (a, b) in enumerate(tree):
        adj[a].append((b, ei))
        adj[b].append((a, ei))
    seen = {leader}
    order = []
    queue = deque([leader])
    while queue:
        u = queue.popleft()
        for v, ei in sorted(adj[u]):
            if v not in seen:
                seen.add(v)
                order.append((ei, u, v))
                queue.append(v)
    if len(seen) != n:
        raise ValueError("tree does not connect every party")
    return order


def merge_to_ghz(
    pairs: Sequence[QuditRegister],
    tree: Sequence[tuple[int, int]],
    leader: int,
    rng: np.random.Generator,
    bus: MessageBus | None = None,
) -> QuditRegister:
    """Fuse one triplet per tree edge into an n-party GHZ state.

    Breadth-first from the leader. The first edge's pair is the seed state.
    For each later edge (u, v), u applies CNOT from its GHZ qubit to its
    half of the new pair, measures that half and broadcasts the bit; v
    applies X if the bit is 1. Returns a register with site i = party i.
    """
    n = len(tree) + 1
    order = bfs_edges(n, tree, leader)
    site_of: dict[int, int] = {}
    reg = None
    for ei, u, v in order:
        pair = pairs[ei]
        a, b = tree[ei]
        if (a, b) != (u, v):  # put the parent's half first
            idx, amp = pair.terms()
            pair = QuditRegister(pair.dims, idx[:, ::-1], amp)
        if reg is None:
            reg = pair
            site_of = {u: 0, v: 1}
            continue
        base = reg.num_sites
        reg = reg.tensor(pair)
        half_u, half_v = base, base + 1
        reg = apply_controlled_add(reg, site_of[u], half_u)
        out, reg = measure(reg, [half_u], "computational", rng)
        bit = out.values[0]
        if bus is not None:
            bus.broadcast("4", u, str(bit))
        if bit:
            reg = apply_x(reg, half_v)
        reg = drop_sites(reg, [half_u])
        site_of[v] = half_u  # dropping shifts half_v down by one
    idx, amp = reg.terms()
    cols = [site_of[p] for p in range(n)]
    return QuditRegister([2] * n, idx[:, cols], amp)


def ghz_state(n: int) -> np.ndarray:
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = vec[-1] = 1 / math.sqrt(2)
    return vec


# ------------------------------------------------------- steps 5-7: sifting


@dataclass
class SiftResult:
    outcomes: np.ndarray  # (2m, n) diagonal-basis bits after noise
    check_positions: tuple[int, ...]
    check_a: np.ndarray
    check_b: np.ndarray
    delta: int
    proceed: bool
    key_a_raw: np.ndarray
    key_b_raw: np.ndarray


def measure_rounds(
    ghz: Sequence[QuditRegister], rng: np.random.Generator
) -> np.ndarray:
    """Step 5: every party measures its qubit of every round diagonally."""
    rows = []
    for reg in ghz:
        out, _ = measure(reg, list(range(reg.num_sites)), "diagonal", rng)
        rows.append(out.values)
    return np.array(rows, dtype=np.uint8).reshape(len(ghz), -1)


def measure_and_sift(
    ghz: Sequence[QuditRegister],
    config: ProtocolConfig,
    rng: np.random.Generator,
    *,
    bus: MessageBus | None = None,
    forced_flips: np.ndarray | None = None,
) -> SiftResult:
    """Steps 5-7. ``forced_flips`` (rounds x n, 0/1) is XORed into the
    outcomes after the noise model, for tests."""
    bus = bus if bus is not None else MessageBus()
    outcomes = measure_rounds(ghz, rng)
    noise = (rng.random(outcomes.shape) < config.noise_p).astype(np.uint8)
    outcomes ^= noise
    if forced_flips is not None:
        outcomes ^= np.asarray(forced_flips, dtype=np.uint8)
    m = config.m
    check = np.sort(rng.choice(config.rounds, size=m, replace=False))
    width = max(1, math.ceil(math.log2(config.rounds)))
    bus.broadcast("6", config.leader, "".join(format(int(c), f"0{width}b") for c in check))
    ga, gb = config.groups
    eff_a = np.bitwise_xor.reduce(outcomes[:, list(ga)], axis=1)
    eff_b = np.bitwise_xor.reduce(outcomes[:, list(gb)], axis=1)
    mask = np.zeros(config.rounds, dtype=bool)
    mask[check] = True
    ca, cb = eff_a[mask], eff_b[mask]
    bus.broadcast("7", ga[0], _bitstr(ca))
    bus.broadcast("7", gb[0], _bitstr(cb))
    delta = int(np.sum(ca != cb))
    proceed = delta / m <= config.abort_threshold
    return SiftResult(outcomes, tuple(int(c) for c in check), ca, cb, delta, proceed,
                      eff_a[~mask], eff_b[~mask])


# ------------------------------------------------------ step 8: reconcile


@dataclass(frozen=True)
class KeyResult:
    key_a: str
    key_b: str
    agreed: bool
    blocks: int
    discarded_bits: int
    flagged_blocks: int

    def to_json(self) -> dict:
        return {
            "key_a": self.key_a,
            "key_b": self.key_b,
            "agreed": self.agreed,
            "blocks": self.blocks,
            "discarded_bits": self.discarded_bits,
            "flagged_blocks": self.flagged_blocks,
        }


def reconcile_and_key(
    string_a,
    string_b,
    code: LinearCode,
    mode: str = SYNDROME,
    *,
    bus: MessageBus | None = None,
    leader: int = 0,
) -> KeyResult:
    """Turn the two groups' effective strings into keys, block by block.

    paper_literal: each group decodes to its nearest codeword on its own.
    syndrome: the leader's group announces its syndrome; the other group
    flips the coset leader of the syndrome difference so both strings share
    a coset, then both decode. A block is flagged when a correction exceeds
    the code's guaranteed radius.
    """
    if mode not in RECONCILIATION_MODES:
        raise ValueError(f"mode must be one of {RECONCILIATION_MODES}")
    a = np.asarray(string_a, dtype=np.uint8)
    b = np.asarray(string_b, dtype=np.uint8)
    if a.shape != b.shape:
        raise ValueError("strings differ in length")
    blocks = len(a) // code.m
    keys_a, keys_b, flagged = [], [], 0
    for i in range(blocks):
        xa = a[i * code.m : (i + 1) * code.m]
        xb = b[i * code.m : (i + 1) * code.m]
        if mode == SYNDROME:
            sa = code.syndrome(xa)
            if bus is not None:
                bus.broadcast("8", leader, _bitstr(sa))
            fix = code.coset_leader(code.syndrome(xb) ^ sa)
            if int(fix.sum()) > code.t:
                flagged += 1
            xb = xb ^ fix
        da, db = code.decode(xa), code.decode(xb)
        if not (da.within_radius and db.within_radius):
            flagged += 1
        keys_a.append(_bitstr(da.message))
        keys_b.append(_bitstr(db.message))
    ka, kb = "".join(keys_a), "".join(keys_b)
    return KeyResult(ka, kb, ka == kb, blocks, len(a) - blocks * code.m, flagged)


# ----------------------------------------------------------- orchestration


@dataclass
class ProtocolTranscript:
    config: ProtocolConfig
    decision: str  # proceed | abort
    abort_step: str | None
    abort_reason: str | None
    edge_stats: list
    outcomes: np.ndarray | None = None
    check_positions: tuple[int, ...] = ()
    check_a: str = ""
    check_b: str = ""
    delta: int | None = None
    noncheck_a: str = ""
    noncheck_b: str = ""
    key: KeyResult | None = None
    bits_by_step: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)
    completion_notices: int = 0
    merge_bits_per_round: int = 0
    timing: float = 0.0

    @property
    def aborted(self) -> bool:
        return self.decision == "abort"

    def summary(self) -> dict:
        cfg = self.config
        ga, gb = cfg.groups
        predicted = effective_error_probability(cfg.n, cfg.noise_p)
        observed = None
        if self.outcomes is not None:
            eff_a = np.bitwise_xor.reduce(self.outcomes[:, list(ga)], axis=1)
            eff_b = np.bitwise_xor.reduce(self.outcomes[:, list(gb)], axis=1)
            observed = float(np.mean(eff_a != eff_b))
        key_bits = len(self.key.key_a) if self.key else 0
        return {
            "decision": self.decision,
            "abort_step": self.abort_step,
            "delta": self.delta,
            "delta_over_m": None if self.delta is None else self.delta / cfg.m,
            "agreed": bool(self.key.agreed) if self.key else False,
            "key_bits": key_bits,
            "key_rate": key_bits / cfg.rounds,
            "classical_bits": int(sum(self.bits_by_step.values())),
            "predicted_mismatch": predicted,
            "predicted_group_error": [
                effective_error_probability(len(ga), cfg.noise_p),
                effective_error_probability(len(gb), cfg.noise_p),
            ],
            "observed_mismatch": observed,
            "capacity": channel_capacity(predicted),
        }

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "decision": self.decision,
            "abort_step": self.abort_step,
            "abort_reason": self.abort_reason,
            "edge_stats": [s.to_json() for s in self.edge_stats],
            "outcomes": None if self.outcomes is None else [_bitstr(r) for r in self.outcomes],
            "check_positions": list(self.check_positions),
            "check_a": self.check_a,
            "check_b": self.check_b,
            "delta": self.delta,
            "noncheck_a": self.noncheck_a,
            "noncheck_b": self.noncheck_b,
            "key": None if self.key is None else self.key.to_json(),
            "bits_by_step": dict(sorted(self.bits_by_step.items())),
            "completion_notices": self.completion_notices,
            "merge_bits_per_round": self.merge_bits_per_round,
            "messages": self.messages,
            "summary": self.summary(),
        }


def run_protocol(config: ProtocolConfig) -> ProtocolTranscript:
    """Steps 1-8, deterministic for a given config (seed included)."""
    start = time.perf_counter()
    bus = MessageBus()
    seed = config.seed

    dist = distribute_epr(config)
    for st in dist.stats:
        # the receiver reveals basis and reading of every sampled pair
        bus.send("1", st.edge[1], st.edge[0], st.announced)
    if not dist.ok:
        bad = [config.tree[e] for e in dist.failed_edges]
        est = max(dist.stats[e].estimate for e in dist.failed_edges)
        return ProtocolTranscript(
            config, "abort", "1",
            f"EPR verification failed on edges {bad} (error estimate {est:.3f} > "
            f"{config.abort_threshold:.3f})",
            list(dist.stats), bits_by_step=bus.bits_by_step(), messages=bus.to_json(),
            timing=time.perf_counter() - start,
        )

    # step 2 and 3
    triplets = {
        ei: [singlet_to_triplet(p, 1) for p in pairs] for ei, pairs in dist.pairs.items()
    }
    notified = sorted({p for e in config.tree for p in e} - {config.leader})
    for p in notified:
        bus.send("3", p, config.leader, "1")

    # step 4
    merge_rng = stream(seed, "step4")
    ghz = []
    for r in range(config.rounds):
        pairs = [triplets[ei][r] for ei in range(len(config.tree))]
        ghz.append(merge_to_ghz(pairs, config.tree, config.leader, merge_rng, bus))
    merge_bits = bus.bits_by_step().get("4", 0) // config.rounds

    # steps 5-7
    sift = measure_and_sift(ghz, config, stream(seed, "step5"), bus=bus)
    transcript = ProtocolTranscript(
        config, "proceed" if sift.proceed else "abort",
        None if sift.proceed else "7",
        None if sift.proceed else
        f"check mismatch {sift.delta}/{config.m} exceeds threshold {config.abort_threshold:.3f}",
        list(dist.stats), sift.outcomes, sift.check_positions,
        _bitstr(sift.check_a), _bitstr(sift.check_b), sift.delta,
        _bitstr(sift.key_a_raw), _bitstr(sift.key_b_raw),
        completion_notices=len(notified), merge_bits_per_round=merge_bits,
    )
    if sift.proceed:
        transcript.key = reconcile_and_key(
            sift.key_a_raw, sift.key_b_raw, config.code, config.reconciliation,
            bus=bus, leader=config.leader,
        )
    transcript.bits_by_step = bus.bits_by_step()
    transcript.messages = bus.to_json()
    transcript.timing = time.perf_counter() - start
    return transcript


def _run_seed(args) -> dict:
    config, seed = args
    cfg = ProtocolConfig(**{**_config_kwargs(config), "seed": seed})
    return run_protocol(cfg).summary()


def _config_kwargs(config: ProtocolConfig) -> dict:
    return {
        "n": config.n, "split": config.split, "tree": config.tree, "leader": config.leader,
        "rounds": config.rounds, "noise_p": config.noise_p, "eve_edge": config.eve_edge,
        "abort_threshold": config.abort_threshold, "code": config.code,
        "reconciliation": config.reconciliation, "check_sample": config.check_sample,
    }


def run_trials(config: ProtocolConfig, trials: int, workers: int = 1) -> list[dict]:
    """Summaries of ``trials`` runs with seeds config.seed, config.seed + 1, ...

    Each run has its own seed, so results do not depend on ``workers``.
    """
    jobs = [(config, config.seed + i) for i in range(trials)]
    if workers <= 1:
        return [_run_seed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_seed, jobs))
