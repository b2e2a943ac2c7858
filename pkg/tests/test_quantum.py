import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aqss.errors import CapacityError
from aqss.quantum import (
    ENV,
    UNASSIGNED,
    DensityView,
    PauliKey,
    QuditRegister,
    apply_basis_permutation,
    apply_controlled_add,
    apply_fourier,
    apply_inverse_fourier,
    apply_pauli,
    basis_state,
    distance,
    drop_sites,
    measure,
    pauli_matrix,
    prepare,
    qotp_decrypt,
    qotp_encrypt,
    reduced_density,
    reduced_trace_distance,
    site_fidelity,
)
from aqss.rng import stream
from aqss.schemes import QtsParams, qts_encode

from .conftest import random_state

S2 = 1 / math.sqrt(2)


def dense_reduced(vec, dims, keep):
    """Reference partial trace via einsum on the dense tensor."""
    psi = vec.reshape(dims)
    rest = [i for i in range(len(dims)) if i not in keep]
    letters = "abcdefghijklmnop"
    bra = [letters[i] for i in range(len(dims))]
    ket = list(bra)
    for i in keep:
        ket[i] = letters[i].upper()
    out = "".join(bra[i] for i in keep) + "".join(ket[i] for i in keep)
    rho = np.einsum(f"{''.join(bra)},{''.join(ket)}->{out}", psi, psi.conj())
    d = math.prod(dims[i] for i in keep)
    return rho.reshape(d, d)


class TestPrepare:
    def test_basis(self):
        reg = prepare([2], [1, 0])
        assert reg.labels == (UNASSIGNED,)
        assert np.allclose(reg.amplitudes, [1, 0])

    def test_epr_and_qutrit(self):
        epr = prepare([2, 2], [S2, 0, 0, S2])
        assert epr.num_terms == 2
        q = prepare([3], np.ones(3) / math.sqrt(3))
        assert abs(q.norm() - 1) < 1e-12

    def test_errors(self):
        with pytest.raises(ValueError):
            prepare([2], [1, 0, 0])
        with pytest.raises(ValueError):
            prepare([2], [1, 1])

    def test_json_round_trip(self):
        reg = prepare([2, 3], random_state(6, stream(1)), ["A", "B"])
        back = QuditRegister.from_json(reg.to_json())
        assert back.labels == reg.labels
        assert np.allclose(back.amplitudes, reg.amplitudes)

    def test_capacity(self, monkeypatch):
        monkeypatch.setenv("AQSS_MAX_DIM", "8")
        with pytest.raises(CapacityError):
            prepare([2] * 4, np.ones(16) / 4)


class TestGates:
    def test_cnot_permutation(self):
        reg = basis_state([2, 2], [1, 0])
        out = apply_basis_permutation(reg, [0, 1], [0, 1, 3, 2])
        assert np.allclose(out.amplitudes, [0, 0, 0, 1])

    def test_identity_permutation(self):
        reg = prepare([2, 2], random_state(4, stream(2)))
        out = apply_basis_permutation(reg, [0, 1], range(4))
        assert np.allclose(out.amplitudes, reg.amplitudes)

    def test_modular_add_qutrits(self):
        perm = [x * 3 + (y + x) % 3 for x in range(3) for y in range(3)]
        vec = random_state(9, stream(3))
        reg = apply_basis_permutation(prepare([3, 3], vec), [0, 1], perm)
        expected = np.zeros(9, dtype=complex)
        for j, p in enumerate(perm):
            expected[p] = vec[j]
        assert np.allclose(reg.amplitudes, expected)
        assert np.allclose(apply_controlled_add(prepare([3, 3], vec), 0, 1).amplitudes, expected)

    def test_non_bijection(self):
        with pytest.raises(ValueError):
            apply_basis_permutation(basis_state([2], [0]), [0], [0, 0])

    def test_hadamard(self):
        out = apply_fourier(basis_state([2], [0]), 0)
        assert np.allclose(out.amplitudes, [S2, S2])

    def test_hhh_on_ghz_even_parity(self):
        reg = prepare([2, 2, 2], [S2, 0, 0, 0, 0, 0, 0, S2])
        for s in range(3):
            reg = apply_fourier(reg, s)
        amps = reg.amplitudes
        for j in range(8):
            parity = bin(j).count("1") % 2
            assert abs(amps[j]) ** 2 == pytest.approx(0.0 if parity else 0.25, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_fourier_inverse(self, d):
        vec = random_state(d, stream(d))
        reg = apply_inverse_fourier(apply_fourier(prepare([d], vec), 0), 0)
        assert np.max(np.abs(reg.amplitudes - vec)) < 1e-12

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_pauli_matches_matrix(self, d):
        vec = random_state(d, stream(10 + d))
        for a, b in itertools.product(range(d), repeat=2):
            out = apply_pauli(prepare([d], vec), 0, a, b)
            assert np.allclose(out.amplitudes, pauli_matrix(d, a, b) @ vec)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_norm_preserved(self, seed):
        rng = stream(seed)
        reg = prepare([2, 3, 2], random_state(12, rng))
        reg = apply_fourier(reg, 1)
        reg = apply_pauli(reg, 0, 1, 1)
        reg = apply_controlled_add(reg, 0, 2)
        assert abs(reg.norm() - 1) < 1e-10


class TestMeasure:
    def test_deterministic(self, rng):
        out, post = measure(basis_state([2], [0]), [0], "computational", rng)
        assert out.values == (0,)

    def test_bell_correlation(self, rng):
        reg = prepare([2, 2], [S2, 0, 0, S2])
        for _ in range(50):
            out, post = measure(reg, [0, 1], "computational", rng)
            assert out.values in ((0, 0), (1, 1))
            assert abs(post.norm() - 1) < 1e-12

    def test_ghz_diagonal_parity(self, rng):
        reg = prepare([2, 2, 2], [S2, 0, 0, 0, 0, 0, 0, S2])
        for _ in range(2000):
            out, _ = measure(reg, [0, 1, 2], "diagonal", rng)
            assert sum(out.values) % 2 == 0
            assert out.basis == "diagonal"

    def test_partial_collapse_and_drop(self, rng):
        reg = prepare([2, 2], [S2, 0, 0, S2])
        out, post = measure(reg, [0], "computational", rng)
        rest = drop_sites(post, [0])
        assert np.allclose(np.abs(rest.amplitudes), np.eye(2)[out.values[0]])
        with pytest.raises(ValueError):
            drop_sites(reg, [0])

    def test_born_statistics(self):
        rng = stream(99)
        reg = prepare([2], [math.sqrt(0.2), math.sqrt(0.8)])
        ones = sum(measure(reg, [0], "computational", rng)[0].values[0] for _ in range(4000))
        assert abs(ones / 4000 - 0.8) < 4 * math.sqrt(0.16 / 4000)


class TestReduced:
    def test_bell_half(self):
        rho = reduced_density(prepare([2, 2], [S2, 0, 0, S2]), [0])
        rho.check()
        assert np.allclose(rho.matrix, np.eye(2) / 2)

    def test_full_register_is_projector(self):
        vec = random_state(6, stream(5))
        rho = reduced_density(prepare([2, 3], vec), [0, 1]).matrix
        assert np.allclose(rho, np.outer(vec, vec.conj()))

    def test_single_share_of_qutrit_code(self):
        reg, shares = qts_encode(prepare([3], random_state(3, stream(6))), 0, QtsParams(2, 3, 3))
        for s in shares.sites:
            assert np.allclose(reduced_density(reg, [s]).matrix, np.eye(3) / 3, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.lists(st.integers(0, 3), min_size=1, max_size=3, unique=True))
    def test_matches_dense_einsum(self, seed, keep):
        dims = [2, 3, 2, 3]
        vec = random_state(36, stream(seed))
        rho = reduced_density(prepare(dims, vec), keep)
        rho.check()
        assert np.allclose(rho.matrix, dense_reduced(vec, dims, keep), atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.lists(st.integers(0, 3), min_size=1, max_size=3, unique=True))
    def test_sparse_trace_distance_matches_dense(self, seed, keep):
        dims = [2, 3, 2, 3]
        rng = stream(seed)
        a, b = prepare(dims, random_state(36, rng)), prepare(dims, random_state(36, rng))
        _, td = distance(reduced_density(a, keep), reduced_density(b, keep))
        assert reduced_trace_distance(a, b, keep) == pytest.approx(td, abs=1e-10)

    def test_site_fidelity(self):
        reg = prepare([2], [S2, S2])
        assert site_fidelity(reg, 0, [S2, S2]) == pytest.approx(1.0)
        assert site_fidelity(reg, 0, [S2, -S2]) == pytest.approx(0.0, abs=1e-12)


class TestDistance:
    def view(self, m):
        return DensityView((0,), (m.shape[0],), np.asarray(m, dtype=complex))

    def test_identical(self):
        rho = np.diag([0.3, 0.7])
        f, t = distance(self.view(rho), self.view(rho))
        assert f == pytest.approx(1.0) and t == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal(self):
        f, t = distance(self.view(np.diag([1, 0])), self.view(np.diag([0, 1])))
        assert f == pytest.approx(0.0, abs=1e-12) and t == pytest.approx(1.0)

    def test_pure_vs_mixed(self):
        f, t = distance(self.view(np.diag([1, 0])), self.view(np.eye(2) / 2))
        assert f == pytest.approx(0.5) and t == pytest.approx(0.5)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            distance(self.view(np.eye(2) / 2), self.view(np.eye(3) / 3))


def mixture(vec, d):
    rho = np.zeros((d, d), dtype=complex)
    for a, b in itertools.product(range(d), repeat=2):
        reg = qotp_encrypt(prepare([d], vec), [0], PauliKey(((a, b),)))
        rho += np.outer(reg.amplitudes, reg.amplitudes.conj())
    return rho / d**2


class TestQotp:
    def test_zero_key(self):
        vec = random_state(2, stream(7))
        out = qotp_encrypt(prepare([2], vec), [0], PauliKey.zero(1))
        assert np.allclose(out.amplitudes, vec)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_uniform_mixture_is_maximally_mixed(self, d):
        for seed in range(5):
            vec = random_state(d, stream(seed, d))
            assert np.max(np.abs(mixture(vec, d) - np.eye(d) / d)) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_decrypt_inverts(self, seed):
        rng = stream(seed)
        reg = prepare([3, 2], random_state(6, rng))
        key = PauliKey.random(reg.dims, rng)
        back = qotp_decrypt(qotp_encrypt(reg, [0, 1], key), [0, 1], key)
        assert np.max(np.abs(back.amplitudes - reg.amplitudes)) < 1e-12

    def test_key_errors(self):
        reg = prepare([2], [1, 0])
        with pytest.raises(ValueError):
            qotp_encrypt(reg, [0], PauliKey.zero(2))
        with pytest.raises(ValueError):
            qotp_encrypt(reg, [0], PauliKey(((2, 0),)))

    def test_key_size(self):
        assert PauliKey.zero(1).bits_per_site(2) == 2
        assert PauliKey.zero(1).bits_per_site(4) == 4


def test_labels():
    reg = basis_state([2, 2], [0, 1], ["A", ENV])
    assert reg.with_label(0, "B").labels == ("B", ENV)
