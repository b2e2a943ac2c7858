import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqss.access import parse_access_structure
from aqss.errors import UnauthorizedError
from aqss.quantum import ENV, prepare, reduced_density, site_fidelity
from aqss.rng import stream
from aqss.schemes import (
    ClassicalShare,
    FieldElement,
    QtsParams,
    classical_monotone_reconstruct,
    classical_monotone_share,
    gf_interpolate,
    min_field,
    qts_encode,
    qts_encode_matrix,
    qts_reconstruct,
    secret_vector,
    shamir_reconstruct,
    shamir_split,
)

from .conftest import random_state


def test_interpolate_example():
    assert gf_interpolate([(1, 1), (3, 0)], 7) == [5, 3]


def test_field_element():
    a, b = FieldElement(3, 7), FieldElement(5, 7)
    assert int(a + b) == 1 and int(a - b) == 5 and int(a * b) == 1
    assert int(a / b) == 2  # 5 * 2 = 10 = 3 mod 7
    assert int(-a) == 4


class TestShamir:
    def test_example(self):
        shares = shamir_split(3, 2, 3, 7, coefficients=[2])
        assert [s.value for s in shares] == [5, 0, 2]
        assert shamir_reconstruct(shares[:2], 2) == 3
        assert shamir_reconstruct([shares[0], shares[2]], 2) == 3

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10), st.integers(1, 5), st.integers(0, 2**32 - 1), st.data())
    def test_round_trip(self, secret, k, seed, data):
        n = data.draw(st.integers(k, 6))
        q = 11
        shares = shamir_split(secret, k, n, q, stream(seed))
        subset = data.draw(st.permutations(shares))[:k]
        assert shamir_reconstruct(subset, k) == secret % q

    def test_privacy_single_share_uniform(self):
        # With k=2 the single share f(1) = s + c is uniform over c for any s.
        for s in range(5):
            values = Counter(shamir_split(s, 2, 3, 5, coefficients=[c])[0].value for c in range(5))
            assert values == Counter(range(5))

    def test_errors(self):
        with pytest.raises(ValueError):
            shamir_split(1, 3, 2, 7, coefficients=[0, 0])
        with pytest.raises(ValueError):
            shamir_split(1, 2, 7, 7, coefficients=[0])
        with pytest.raises(ValueError):
            shamir_split(1, 2, 3, 8, coefficients=[0])
        with pytest.raises(ValueError):
            shamir_reconstruct(shamir_split(1, 2, 3, 7, coefficients=[1])[:1], 2)

    def test_json(self):
        s = ClassicalShare(2, 4, 7)
        assert ClassicalShare.from_json(s.to_json()) == s


class TestMonotone:
    def test_exhaustive(self, two_cliques, rng):
        key = rng.integers(0, 2, size=12).astype(np.uint8)
        bundles = classical_monotone_share(two_cliques, key, rng)
        for r in range(len(two_cliques.players) + 1):
            for coalition in itertools.combinations(two_cliques.players, r):
                if two_cliques.is_authorized(coalition):
                    out = classical_monotone_reconstruct(bundles, coalition, two_cliques)
                    assert np.array_equal(out, key)
                else:
                    with pytest.raises(UnauthorizedError):
                        classical_monotone_reconstruct(bundles, coalition, two_cliques)

    def test_pieces_uniform_for_unauthorized(self):
        # For {AB}, A's piece alone is independent of the key.
        gamma = parse_access_structure("{AB}")
        for key in ("0", "1"):
            counts = Counter(
                int(classical_monotone_share(gamma, key, stream(i))["A"][0][0]) for i in range(2000)
            )
            assert abs(counts[1] / 2000 - 0.5) < 0.05


class TestQts:
    def test_23_encoding_of_one(self):
        params = QtsParams(2, 3, 3)
        reg, shares = qts_encode(prepare([3], [0, 1, 0]), 0, params)
        amps = reg.amplitudes.reshape(3, 3, 3)
        for idx in itertools.product(range(3), repeat=3):
            want = 1 / math.sqrt(3) if idx in {(0, 1, 2), (1, 2, 0), (2, 0, 1)} else 0.0
            assert abs(amps[idx] - want) < 1e-12

    @pytest.mark.parametrize("k,n,q", [(2, 3, 3), (2, 2, 3), (3, 5, 5), (3, 4, 5)])
    def test_isometry(self, k, n, q):
        mat = qts_encode_matrix(QtsParams(k, n, q))
        assert np.allclose(mat.T @ mat, np.eye(q))

    def test_env_labelling(self):
        reg, shares = qts_encode(prepare([3], [1, 0, 0]), 0, QtsParams(2, 2, 3), ["A", "B"])
        assert [reg.labels[s] for s in shares.sites] == ["A", "B", ENV]

    @pytest.mark.parametrize("k,n", [(2, 3), (3, 5)])
    def test_round_trip_every_subset(self, k, n):
        q = min_field(k, n)
        params = QtsParams(k, n, q)
        vec = random_state(q, stream(k, n))
        reg, shares = qts_encode(prepare([q], vec), 0, params)
        for held in itertools.combinations(range(n), k):
            out, site = qts_reconstruct(reg, params, shares.held(held))
            assert site_fidelity(out, site, vec) > 1 - 1e-9

    def test_below_threshold_maximally_mixed(self):
        params = QtsParams(3, 5, 5)
        reg, shares = qts_encode(prepare([5], random_state(5, stream(3))), 0, params)
        for held in itertools.combinations(range(5), 2):
            rho = reduced_density(reg, [shares.sites[p] for p in held]).matrix
            assert np.allclose(rho, np.eye(25) / 25, atol=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            QtsParams(2, 4, 5)  # no-cloning
        with pytest.raises(ValueError):
            QtsParams(3, 5, 4)  # not prime
        with pytest.raises(ValueError):
            QtsParams(3, 5, 3)  # too few points
        params = QtsParams(2, 3, 3)
        reg, shares = qts_encode(prepare([3], [1, 0, 0]), 0, params)
        with pytest.raises(ValueError):
            qts_reconstruct(reg, params, shares.held([0]))
        with pytest.raises(ValueError):
            qts_encode(prepare([2], [1, 0]), 0, params)

    def test_min_field(self):
        assert min_field(2, 3) == 3
        assert min_field(3, 5) == 5
        assert min_field(1, 1) == 2
        assert min_field(2, 2, secret_dim=4) == 5

    def test_secret_vector(self):
        assert np.allclose(secret_vector([0, 1], 3), [0, 1, 0])
        with pytest.raises(ValueError):
            secret_vector([1, 1], 3)
