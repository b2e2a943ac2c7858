import itertools
import math
from collections import Counter

import numpy as np
import pytest

from aqss.access import DEALER, parse_access_structure
from aqss.engine import (
    bits_to_key,
    certify_leakage,
    encrypted_reconstruct,
    encrypted_share,
    field_size,
    key_to_bits,
    leakage_report,
    quantum_reconstruct,
    quantum_share,
    realize,
    state_fidelity,
)
from aqss.errors import AuthorizedError, UnauthorizedError
from aqss.plan import DEALER_ASSISTED, build_aqss_plan, evaluate_coalition
from aqss.quantum import ENV, PauliKey, prepare
from aqss.rng import stream

from .conftest import random_state

S2 = 1 / math.sqrt(2)


def plan_of(text, mode="strict"):
    return build_aqss_plan(parse_access_structure(text), mode)


def all_coalitions(parties):
    for r in range(len(parties) + 1):
        yield from itertools.combinations(parties, r)


class TestAllocation:
    def test_two_disjoint_sets(self):
        plan = plan_of("{AB, CD}")
        alloc = quantum_share(plan, [1, 0])
        counts = Counter(alloc.ownership)
        assert {p: counts[p] for p in "ABCD"} == {p: 1 for p in "ABCD"}
        assert counts[DEALER] == 1
        assert counts[ENV] == 2
        assert alloc.q == 3
        m = alloc.manifest()
        assert m["sites"] == 7 and len(m["plan_id"]) == 16

    def test_single_class(self):
        plan = plan_of("{AB, AC}")
        assert plan.lam == 1
        alloc = quantum_share(plan, [S2, S2])
        assert DEALER not in alloc.ownership

    def test_three_classes_ownership(self):
        plan = plan_of("{ABC, BD, EFG}")
        alloc = quantum_share(plan, [1, 0])
        assert alloc.q == 3
        assert alloc.register.num_sites == 15
        extras = [leaf for leaf in plan.leaves() if leaf.role == "extra"]
        assert extras and all(leaf.owner == "B" for leaf in extras)
        assert alloc.register.num_terms == 2187

    def test_field_size_and_errors(self):
        plan = plan_of("{AB, CD}")
        assert field_size(plan) == 3
        assert field_size(plan, 4) == 5
        with pytest.raises(ValueError):
            quantum_share(plan, [1, 0], q=2)

    def test_realize_has_env_padding(self):
        tree = realize(plan_of("{AB}"))
        assert tree.k == 2 and len(tree.children) == 3
        assert sum(type(c).__name__ == "REnv" for c in tree.children) == 1


class TestReconstruct:
    @pytest.mark.parametrize("text", ["{AB, CD}", "{AB, AC}", "{AB, BC, DE}"])
    def test_exhaustive_basis_and_superposition(self, text):
        plan = plan_of(text, DEALER_ASSISTED)
        vec = random_state(2, stream(len(text)))
        alloc = quantum_share(plan, vec)
        for coalition in all_coalitions(plan.parties()):
            if evaluate_coalition(plan, coalition):
                rec = quantum_reconstruct(alloc, coalition)
                assert rec.fidelity > 1 - 1e-9
                assert abs(abs(np.vdot(rec.state()[:2], vec)) - 1) < 1e-9
            else:
                with pytest.raises(UnauthorizedError):
                    quantum_reconstruct(alloc, coalition)

    def test_unauthorized_does_not_touch_register(self):
        alloc = quantum_share(plan_of("{AB, CD}"), [1, 0])
        before = alloc.register.amplitudes.copy()
        with pytest.raises(UnauthorizedError):
            quantum_reconstruct(alloc, ["A", "C"])
        assert np.array_equal(alloc.register.amplitudes, before)

    def test_player_cover_reconstructs_without_dealer(self):
        alloc = quantum_share(plan_of("{AB, CD}"), [0, 1])
        assert quantum_reconstruct(alloc, "ABCD").fidelity > 1 - 1e-9


class TestLeakage:
    def test_dealer_alone(self):
        rep = certify_leakage(plan_of("{AB, CD}"), [DEALER])
        assert rep.ok and rep.pairs == 2

    def test_single_class_with_dealer(self):
        rep = certify_leakage(plan_of("{AB, CD}"), ["A", "B"])
        assert rep.ok
        rep = certify_leakage(plan_of("{AB, CD}"), [DEALER, "A", "C"])
        assert rep.ok

    def test_authorized_refused(self):
        with pytest.raises(AuthorizedError):
            leakage_report(plan_of("{AB, CD}"), [DEALER, "A", "B"], [1, 0], [0, 1])
        with pytest.raises(AuthorizedError):
            leakage_report(plan_of("{AB, CD}"), "ABCD", [1, 0], [0, 1])

    def test_report_json(self):
        rep = leakage_report(plan_of("{AB, CD}"), ["C", "A"], [1, 0], [S2, S2])
        data = rep.to_json()
        assert data["coalition"] == ["A", "C"] and data["ok"]


class TestEncrypted:
    def test_round_trip_every_coalition(self, two_cliques, rng):
        secret = prepare([2], random_state(2, rng))
        enc = encrypted_share(two_cliques, secret, rng)
        for coalition in all_coalitions(two_cliques.players):
            if two_cliques.is_authorized(coalition):
                out = encrypted_reconstruct(enc, coalition + (DEALER,))
                assert state_fidelity(out, secret) > 1 - 1e-12
            else:
                with pytest.raises(UnauthorizedError):
                    encrypted_reconstruct(enc, coalition + (DEALER,))

    def test_zero_key(self, rng):
        gamma = parse_access_structure("{AB}")
        secret = prepare([2], [S2, S2])
        enc = encrypted_share(gamma, secret, rng, key=PauliKey.zero(1))
        assert np.allclose(enc.ciphertext.amplitudes, secret.amplitudes)
        assert state_fidelity(encrypted_reconstruct(enc, "AB"), secret) > 1 - 1e-12

    def test_single_player(self, rng):
        gamma = parse_access_structure("{A}")
        secret = prepare([3], random_state(3, rng))
        enc = encrypted_share(gamma, secret, rng)
        assert state_fidelity(encrypted_reconstruct(enc, "A"), secret) > 1 - 1e-12
        assert enc.manifest()["key_bits_encoded"] == 4

    def test_average_ciphertext_is_maximally_mixed(self):
        gamma = parse_access_structure("{AB}")
        secret = prepare([3], random_state(3, stream(1)))
        rho = np.zeros((3, 3), dtype=complex)
        for a, b in itertools.product(range(3), repeat=2):
            c = encrypted_share(gamma, secret, stream(a, b), key=PauliKey(((a, b),))).ciphertext
            rho += np.outer(c.amplitudes, c.amplitudes.conj()) / 9
        assert np.allclose(rho, np.eye(3) / 3, atol=1e-12)

    def test_key_bits_round_trip(self):
        key = PauliKey(((2, 1), (0, 1)))
        bits = key_to_bits(key, [3, 2])
        assert "".join(map(str, bits)) == "1001" + "01"
        assert bits_to_key(bits, [3, 2]) == key
        with pytest.raises(ValueError):
            bits_to_key(bits[:-1], [3, 2])
