"""Independent brute-force checks of the main algorithms.

Each suite recomputes a result by the most direct method available
(exhaustive enumeration, dense linear algebra, direct sampling) and compares
it with the library's answer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .access import ASGraph
from .cliques import min_clique_partition
from .qkd import (
    TRIPLET,
    effective_error_closed_form,
    effective_error_probability,
    merge_to_ghz,
    star_tree,
)
from .quantum import distance, fourier_matrix, measure, prepare, reduced_density, site_fidelity
from .rng import stream
from .schemes import QtsParams, min_field, qts_encode, qts_reconstruct


@dataclass
class OracleResult:
    suite: str
    agree: bool
    checked: int
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "agree": self.agree,
            "checked": self.checked,
            "failures": self.failures[:20],
            "details": self.details,
        }


# -------------------------------------------------------------- clique cover


def set_partitions(items: list):
    """Every partition of ``items`` into non-empty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def brute_force_clique_cover(n: int, edges: set[tuple[int, int]]) -> int:
    def clique(block):
        return all((min(a, b), max(a, b)) in edges for a, b in itertools.combinations(block, 2))

    return min(len(p) for p in set_partitions(list(range(n))) if all(clique(b) for b in p))


def _connected(n: int, edges) -> bool:
    if n <= 1:
        return True
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, todo = {0}, [0]
    while todo:
        for w in adj[todo.pop()] - seen:
            seen.add(w)
            todo.append(w)
    return len(seen) == n


def connected_graphs(max_n: int):
    """All connected labeled graphs with 1..max_n vertices."""
    for n in range(1, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1 << len(pairs)):
            edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
            if _connected(n, edges):
                yield n, edges


def clique_bruteforce(max_n: int = 6, random_graphs: int = 200, random_max: int = 8,
                      seed: int = 0) -> OracleResult:
    rng = stream(seed, "oracle", "clique")
    cases = list(connected_graphs(max_n))
    for _ in range(random_graphs):
        n = int(rng.integers(1, random_max + 1))
        density = rng.random()
        pairs = itertools.combinations(range(n), 2)
        cases.append((n, [e for e in pairs if rng.random() < density]))
    failures = []
    for n, edges in cases:
        graph = ASGraph.from_edges(n, edges)
        part = min_clique_partition(graph)
        truth = brute_force_clique_cover(n, set(graph.edges))
        if part.size != truth or not part.is_valid(graph):
            failures.append({"n": n, "edges": [list(e) for e in sorted(graph.edges)],
                             "got": part.size, "expected": truth})
    return OracleResult("clique_bruteforce", not failures, len(cases), failures,
                        {"exhaustive_max_n": max_n, "random_graphs": random_graphs,
                         "random_max_n": random_max})


# ------------------------------------------------------------ QTS round trip


def _random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def qts_disentangle(schemes=((2, 3), (3, 5)), superpositions: int = 20, seed: int = 0,
                    tol: float = 1e-9) -> OracleResult:
    """Encode, then reconstruct from every authorized subset; compare
    sub-threshold reduced states with dense partial traces."""
    rng = stream(seed, "oracle", "qts")
    failures = []
    checked = 0
    worst_fid, worst_td = 1.0, 0.0
    for k, n in schemes:
        q = min_field(k, n)
        params = QtsParams(k, n, q)
        secrets = [np.eye(q, dtype=complex)[s] for s in range(q)]
        secrets += [_random_state(q, rng) for _ in range(superpositions)]
        encoded = []
        for vec in secrets:
            reg, shares = qts_encode(prepare([q], vec), 0, params)
            encoded.append((vec, reg, shares))
        for size in range(k, n + 1):
            for held in itertools.combinations(range(n), size):
                for vec, reg, shares in encoded:
                    out, site = qts_reconstruct(reg, params, shares.held(held))
                    fid = site_fidelity(out, site, vec)
                    worst_fid = min(worst_fid, fid)
                    checked += 1
                    if fid < 1 - tol:
                        failures.append({"scheme": [k, n], "held": list(held), "fidelity": fid})
        pairs = [(encoded[0], encoded[s]) for s in range(1, q)] + [
            (encoded[q + 2 * i], encoded[q + 2 * i + 1]) for i in range(superpositions // 2)
        ]
        for size in range(1, k):
            for held in itertools.combinations(range(n), size):
                for (_, ra, sa), (_, rb, _) in pairs:
                    sites = [sa.sites[p] for p in held]
                    _, td = distance(reduced_density(ra, sites), reduced_density(rb, sites))
                    worst_td = max(worst_td, td)
                    checked += 1
                    if td > tol:
                        failures.append({"scheme": [k, n], "held": list(held), "trace_distance": td})
    return OracleResult("qts_disentangle", not failures, checked, failures,
                        {"worst_fidelity": worst_fid, "worst_trace_distance": worst_td})


# ---------------------------------------------------------------- parity law


def parity_law(ns=(3, 4, 5), samples: int = 10_000, seed: int = 0) -> OracleResult:
    """Merge GHZ states, inspect the diagonal-basis amplitudes directly, then
    sample diagonal measurements and check every bipartition's parities."""
    failures = []
    checked = 0
    details = {}
    for n in ns:
        rng = stream(seed, "oracle", "parity", n)
        tree = star_tree(n) if n % 2 else tuple((i, i + 1) for i in range(n - 1))
        pairs = [prepare([2, 2], TRIPLET) for _ in tree]
        ghz = merge_to_ghz(pairs, tree, 0, rng)
        h = fourier_matrix(2)
        dense = ghz.amplitudes.reshape([2] * n)
        for axis in range(n):
            dense = np.moveaxis(np.tensordot(h, dense, axes=([1], [axis])), 0, axis)
        odd_weight = 0.0
        for bits in itertools.product((0, 1), repeat=n):
            if sum(bits) % 2:
                odd_weight += abs(dense[bits]) ** 2
        odd_weight = float(odd_weight)
        if odd_weight > 1e-20:
            failures.append({"n": n, "odd_probability": odd_weight})
        subsets = [s for r in range(1, n) for s in itertools.combinations(range(n), r)]
        odd = 0
        mismatched = 0
        for _ in range(samples):
            out, _ = measure(ghz, list(range(n)), "diagonal", rng)
            bits = out.values
            odd += sum(bits) % 2
            for s in subsets:
                a = sum(bits[i] for i in s) % 2
                b = sum(bits[i] for i in range(n) if i not in s) % 2
                mismatched += a != b
        checked += samples
        if odd or mismatched:
            failures.append({"n": n, "odd_outcomes": odd, "bipartition_mismatches": mismatched})
        details[str(n)] = {"samples": samples, "odd_outcomes": odd, "odd_probability": odd_weight,
                           "bipartitions": len(subsets), "bipartition_mismatches": mismatched}
    return OracleResult("parity_law", not failures, checked, failures, details)


# ----------------------------------------------------------------- P formula


def p_formula(sizes=(1, 2, 3, 4), ps=(0.05, 0.1, 0.2), samples: int = 100_000,
              seed: int = 0) -> OracleResult:
    failures = []
    worst_sigma = 0.0
    worst_closed = 0.0
    for s in sizes:
        for p in ps:
            rng = stream(seed, "oracle", "p", s, int(round(p * 1e6)))
            exact = effective_error_probability(s, p)
            closed = effective_error_closed_form(s, p)
            worst_closed = max(worst_closed, abs(exact - closed))
            flips = rng.random((samples, s)) < p
            freq = float(np.mean(np.bitwise_xor.reduce(flips, axis=1)))
            sigma = math.sqrt(exact * (1 - exact) / samples)
            z = abs(freq - exact) / sigma
            worst_sigma = max(worst_sigma, z)
            if z > 3 or abs(exact - closed) > 1e-12:
                failures.append({"s": s, "p": p, "formula": exact, "closed_form": closed,
                                 "monte_carlo": freq, "sigmas": z})
    return OracleResult("p_formula", not failures, len(sizes) * len(ps), failures,
                        {"samples": samples, "worst_sigmas": worst_sigma,
                         "worst_closed_form_gap": worst_closed})


SUITES = {
    "clique_bruteforce": clique_bruteforce,
    "qts_disentangle": qts_disentangle,
    "parity_law": parity_law,
    "p_formula": p_formula,
}


def run_suite(name: str, seed: int = 0) -> OracleResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed=seed)
