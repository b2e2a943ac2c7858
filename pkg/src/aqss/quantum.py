"""Desk-scale simulation of prime-dimension qudit registers.

States are stored as a table of nonzero computational-basis terms: an integer
array of site digits, one row per term, plus a complex amplitude per row. The
secret-sharing codes used in this package are uniform superpositions over
codewords, so even registers with 3**15 basis states keep only a few thousand
terms. Dense vectors are available on demand for small registers.

All operations return new registers; inputs are never mutated.
"""

from __future__ import annotations

import math
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import CapacityError

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8
# terms with |amplitude| below this are dropped after every operation
PRUNE = 1e-13

ENV = "env"
UNASSIGNED = "unassigned"


def max_terms() -> int:
    """Cap on stored amplitudes; override with the AQSS_MAX_DIM env var."""
    return int(os.environ.get("AQSS_MAX_DIM", 2**22))


def _check_cap(n: int, what: str = "register") -> None:
    cap = max_terms()
    if n > cap:
        raise CapacityError(f"{what} needs {n} amplitudes, cap is {cap} (set AQSS_MAX_DIM)")


def _canonical(idx: np.ndarray, amp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort rows lexicographically, merge duplicates, drop negligible terms."""
    if len(amp) == 0:
        return idx, amp
    order = np.lexsort(idx.T[::-1]) if idx.shape[1] else np.arange(len(amp))
    idx = idx[order]
    amp = amp[order]
    if idx.shape[1]:
        new = np.ones(len(amp), dtype=bool)
        new[1:] = np.any(idx[1:] != idx[:-1], axis=1)
    else:
        new = np.zeros(len(amp), dtype=bool)
        new[0] = True
    if not new.all():
        starts = np.flatnonzero(new)
        amp = np.add.reduceat(amp, starts)
        idx = idx[starts]
    keep = np.abs(amp) > PRUNE
    return idx[keep], amp[keep]


def _joint(idx: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Mixed-radix index of the given digit columns (first column most significant)."""
    out = np.zeros(idx.shape[0], dtype=np.int64)
    for col, d in enumerate(dims):
        out = out * d + idx[:, col]
    return out


def _split(joint: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    out = np.empty((len(joint), len(dims)), dtype=np.int64)
    rest = np.array(joint, dtype=np.int64)
    for col in range(len(dims) - 1, -1, -1):
        out[:, col] = rest % dims[col]
        rest //= dims[col]
    return out


@dataclass(frozen=True)
class Outcome:
    """Measured digits for the listed sites and the basis they were read in."""

    sites: tuple[int, ...]
    values: tuple[int, ...]
    basis: str = "computational"

    def __post_init__(self):
        if self.basis not in ("computational", "diagonal"):
            raise ValueError(f"unknown basis {self.basis!r}")


class QuditRegister:
    """Pure state on an ordered list of qudit sites.

    Parameters
    ----------
    dims : sequence of int
        Local dimension of each site.
    idx : ndarray, shape (terms, sites)
        Digits of every basis term with nonzero amplitude.
    amp : ndarray, shape (terms,)
        Complex amplitudes matching ``idx``.
    labels : sequence of str, optional
        Owner tag per site (player name, ``"dealer"``, ``"env"``...).
    """

    __slots__ = ("dims", "labels", "_idx", "_amp")

    def __init__(self, dims, idx, amp, labels=None, *, _trusted=False):
        self.dims = tuple(int(d) for d in dims)
        if labels is None:
            labels = (UNASSIGNED,) * len(self.dims)
        self.labels = tuple(str(x) for x in labels)
        if len(self.labels) != len(self.dims):
            raise ValueError("one label per site required")
        idx = np.asarray(idx, dtype=np.int64).reshape(-1, len(self.dims))
        amp = np.asarray(amp, dtype=complex).reshape(-1)
        if idx.shape[0] != amp.shape[0]:
            raise ValueError("idx and amp disagree on the number of terms")
        if not _trusted:
            if np.any(idx < 0) or np.any(idx >= np.array(self.dims, dtype=np.int64)):
                raise ValueError("basis digit out of range")
            idx, amp = _canonical(idx, amp)
        _check_cap(len(amp))
        self._idx = idx
        self._amp = amp
        self._idx.setflags(write=False)
        self._amp.setflags(write=False)

    # ----------------------------------------------------------------- views

    @property
    def num_sites(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def num_terms(self) -> int:
        return len(self._amp)

    def terms(self) -> tuple[np.ndarray, np.ndarray]:
        """Read-only (digits, amplitudes) arrays."""
        return self._idx, self._amp

    @property
    def amplitudes(self) -> np.ndarray:
        """Dense amplitude vector, site 0 most significant."""
        _check_cap(self.total_dim, "dense vector")
        vec = np.zeros(self.total_dim, dtype=complex)
        vec[_joint(self._idx, self.dims)] = self._amp
        return vec

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self._amp) ** 2)))

    def inner(self, other: QuditRegister) -> complex:
        """<self|other> for registers with identical site dimensions."""
        if self.dims != other.dims:
            raise ValueError("dimension mismatch")
        a = dict(zip(map(tuple, self._idx.tolist()), self._amp))
        total = 0j
        for row, v in zip(map(tuple, other._idx.tolist()), other._amp):
            u = a.get(row)
            if u is not None:
                total += np.conj(u) * v
        return complex(total)

    def relabel(self, labels: Sequence[str]) -> QuditRegister:
        return QuditRegister(self.dims, self._idx, self._amp, labels, _trusted=True)

    def with_label(self, site: int, label: str) -> QuditRegister:
        labels = list(self.labels)
        labels[site] = label
        return self.relabel(labels)

    def tensor(self, other: QuditRegister) -> QuditRegister:
        """Product state self (x) other, with other's sites appended."""
        n, m = self.num_terms, other.num_terms
        _check_cap(n * m)
        idx = np.concatenate(
            [np.repeat(self._idx, m, axis=0), np.tile(other._idx, (n, 1))], axis=1
        )
        amp = np.repeat(self._amp, m) * np.tile(other._amp, n)
        return QuditRegister(self.dims + other.dims, idx, amp, self.labels + other.labels)

    def __repr__(self):
        return f"QuditRegister(dims={self.dims}, terms={self.num_terms})"

    # ----------------------------------------------------------- serialize

    def to_json(self) -> dict:
        vec = self.amplitudes
        return {
            "dims": list(self.dims),
            "labels": list(self.labels),
            "amplitudes": [[float(z.real), float(z.imag)] for z in vec],
        }

    @classmethod
    def from_json(cls, data: dict) -> QuditRegister:
        amps = [complex(re, im) for re, im in data["amplitudes"]]
        dims = data.get("dims") or [len(amps)]
        return prepare(dims, amps, labels=data.get("labels"))


def prepare(dims: Sequence[int], amplitudes, labels=None) -> QuditRegister:
    """Build a register from a dense amplitude list.

    Raises ValueError if the length is not prod(dims) or the vector is not
    normalized within 1e-10.
    """
    dims = [int(d) for d in dims]
    if not dims or any(d < 2 for d in dims):
        raise ValueError(f"site dimensions must be >= 2, got {dims}")
    vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if vec.size != math.prod(dims):
        raise ValueError(f"expected {math.prod(dims)} amplitudes, got {vec.size}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"amplitudes not normalized (norm {norm:.12g})")
    nz = np.flatnonzero(vec)
    return QuditRegister(dims, _split(nz, dims), vec[nz], labels)


def basis_state(dims: Sequence[int], digits: Sequence[int], labels=None) -> QuditRegister:
    return QuditRegister(dims, [list(digits)], [1.0], labels)


# --------------------------------------------------------------------- gates


def apply_basis_permutation(reg: QuditRegister, sites: Sequence[int], perm) -> QuditRegister:
    """Permute the joint computational basis of ``sites``.

    ``perm[j]`` is the image of joint basis index ``j`` (first listed site most
    significant). Raises ValueError if ``perm`` is not a bijection.
    """
    sites = list(sites)
    if len(set(sites)) != len(sites):
        raise ValueError("repeated site")
    sub = [reg.dims[s] for s in sites]
    size = math.prod(sub)
    perm = np.asarray(perm, dtype=np.int64).reshape(-1)
    if perm.size != size or not np.array_equal(np.sort(perm), np.arange(size)):
        raise ValueError("permutation table is not a bijection on the joint basis")
    idx, amp = reg.terms()
    new = idx.copy()
    new[:, sites] = _split(perm[_joint(idx[:, sites], sub)], sub)
    return QuditRegister(reg.dims, new, amp, reg.labels)


def apply_isometry(
    reg: QuditRegister,
    site: int,
    matrix,
    out_dims: Sequence[int] | None = None,
    new_labels: Sequence[str] | None = None,
) -> QuditRegister:
    """Apply a linear map from ``site`` onto one or more output sites.

    ``matrix`` has shape (prod(out_dims), dims[site]). The first output digit
    replaces ``site``; any further outputs are appended as new sites.
    """
    d_in = reg.dims[site]
    matrix = np.asarray(matrix, dtype=complex)
    out_dims = list(out_dims) if out_dims is not None else [matrix.shape[0]]
    if matrix.shape != (math.prod(out_dims), d_in):
        raise ValueError(f"matrix shape {matrix.shape} does not match {out_dims} x {d_in}")
    extra = len(out_dims) - 1
    if new_labels is None:
        new_labels = [UNASSIGNED] * extra
    if len(new_labels) != extra:
        raise ValueError("one label per appended site required")

    idx, amp = reg.terms()
    out_digits = _split(np.arange(matrix.shape[0]), out_dims)
    rows, cols = np.nonzero(matrix)
    # group the nonzero matrix entries by input column
    parts_idx, parts_amp = [], []
    for s in range(d_in):
        sel = np.flatnonzero(idx[:, site] == s)
        outs = rows[cols == s]
        if len(sel) == 0 or len(outs) == 0:
            continue
        base = np.repeat(idx[sel], len(outs), axis=0)
        dig = np.tile(out_digits[outs], (len(sel), 1))
        base[:, site] = dig[:, 0]
        parts_idx.append(np.concatenate([base, dig[:, 1:]], axis=1))
        parts_amp.append(np.repeat(amp[sel], len(outs)) * np.tile(matrix[outs, s], len(sel)))
    dims = list(reg.dims)
    dims[site] = out_dims[0]
    dims += out_dims[1:]
    labels = list(reg.labels) + list(new_labels)
    if not parts_amp:
        return QuditRegister(dims, np.zeros((0, len(dims))), [], labels, _trusted=True)
    _check_cap(sum(len(a) for a in parts_amp))
    return QuditRegister(dims, np.concatenate(parts_idx), np.concatenate(parts_amp), labels)


def fourier_matrix(d: int, inverse: bool = False) -> np.ndarray:
    """d-dimensional DFT, F[j, k] = w**(j k) / sqrt(d); the Hadamard for d = 2."""
    j = np.arange(d)
    sign = -1.0 if inverse else 1.0
    return np.exp(sign * 2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def apply_fourier(reg: QuditRegister, site: int, inverse: bool = False) -> QuditRegister:
    return apply_isometry(reg, site, fourier_matrix(reg.dims[site], inverse))


def apply_inverse_fourier(reg: QuditRegister, site: int) -> QuditRegister:
    return apply_fourier(reg, site, inverse=True)


def pauli_matrix(d: int, a: int, b: int) -> np.ndarray:
    """Generalized Pauli X^a Z^b with X|j> = |j+1>, Z|j> = w^j |j>."""
    j = np.arange(d)
    x = np.zeros((d, d), dtype=complex)
    x[(j + a) % d, j] = 1.0
    z = np.diag(np.exp(2j * np.pi * b * j / d))
    return x @ z


def apply_pauli(reg: QuditRegister, site: int, a: int, b: int) -> QuditRegister:
    """Apply X^a Z^b to one site (Z first)."""
    d = reg.dims[site]
    idx, amp = reg.terms()
    phase = np.exp(2j * np.pi * (b % d) * idx[:, site] / d)
    new = idx.copy()
    new[:, site] = (idx[:, site] + a) % d
    return QuditRegister(reg.dims, new, amp * phase, reg.labels)


def apply_x(reg: QuditRegister, site: int, power: int = 1) -> QuditRegister:
    return apply_pauli(reg, site, power, 0)


def apply_z(reg: QuditRegister, site: int, power: int = 1) -> QuditRegister:
    return apply_pauli(reg, site, 0, power)


def apply_controlled_add(reg: QuditRegister, control: int, target: int) -> QuditRegister:
    """|c, t> -> |c, t + c mod d>; the CNOT for qubits."""
    if reg.dims[control] != reg.dims[target]:
        raise ValueError("controlled add needs equal dimensions")
    idx, amp = reg.terms()
    new = idx.copy()
    new[:, target] = (idx[:, target] + idx[:, control]) % reg.dims[target]
    return QuditRegister(reg.dims, new, amp, reg.labels)


# --------------------------------------------------------------- measurement


def measure(
    reg: QuditRegister,
    sites: Sequence[int],
    basis: str,
    rng: np.random.Generator,
) -> tuple[Outcome, QuditRegister]:
    """Projective measurement of ``sites`` with Born-rule sampling.

    In the diagonal basis each site is measured in the Fourier basis
    {F|k>}: the inverse transform is applied, the digits are read, and the
    collapsed sites are rotated back so the returned register holds F|k>.
    """
    sites = list(sites)
    if basis not in ("computational", "diagonal"):
        raise ValueError(f"unknown basis {basis!r}")
    work = reg
    if basis == "diagonal":
        for s in sites:
            work = apply_inverse_fourier(work, s)
    idx, amp = work.terms()
    sub = [work.dims[s] for s in sites]
    keys = _joint(idx[:, sites], sub)
    uniq, inverse = np.unique(keys, return_inverse=True)
    probs = np.bincount(inverse, weights=np.abs(amp) ** 2)
    probs = probs / probs.sum()
    pick = int(rng.choice(len(uniq), p=probs))
    keep = inverse == pick
    new_amp = amp[keep] / np.sqrt(probs[pick] * np.sum(np.abs(amp) ** 2))
    post = QuditRegister(work.dims, idx[keep], new_amp, work.labels, _trusted=True)
    if basis == "diagonal":
        for s in sites:
            post = apply_fourier(post, s)
    values = tuple(int(v) for v in _split(np.array([uniq[pick]]), sub)[0])
    return Outcome(tuple(sites), values, basis), post


def drop_sites(reg: QuditRegister, sites: Iterable[int]) -> QuditRegister:
    """Remove sites that are in a definite basis state (e.g. just measured).

    Raises ValueError if any of them is still entangled or in superposition.
    """
    sites = sorted(set(sites))
    idx, amp = reg.terms()
    if len(amp) and np.any(idx[:, sites] != idx[0, sites]):
        raise ValueError(f"sites {sites} are not in a product basis state")
    keep = [s for s in range(reg.num_sites) if s not in sites]
    return QuditRegister(
        [reg.dims[s] for s in keep], idx[:, keep], amp, [reg.labels[s] for s in keep]
    )


# ------------------------------------------------------------ reduced states


@dataclass(frozen=True)
class DensityView:
    """Reduced density matrix of ``sites`` (site order as listed)."""

    sites: tuple[int, ...]
    dims: tuple[int, ...]
    matrix: np.ndarray

    def check(self) -> None:
        """Raise AssertionError if the matrix is not a valid density operator."""
        m = self.matrix
        assert np.allclose(m, m.conj().T, atol=HERMITIAN_TOL), "not Hermitian"
        assert abs(np.trace(m) - 1.0) < NORM_TOL, "trace != 1"
        assert np.linalg.eigvalsh(m).min() > -PSD_TOL, "not positive semidefinite"


def _bipartite(reg: QuditRegister, sites: Sequence[int]):
    """Row keys (joint index over ``sites``) and column keys (compacted
    index over the complement) for every stored term."""
    sites = list(sites)
    rest = [s for s in range(reg.num_sites) if s not in sites]
    idx, amp = reg.terms()
    rows = _joint(idx[:, sites], [reg.dims[s] for s in sites])
    if rest:
        _, cols = np.unique(idx[:, rest], axis=0, return_inverse=True)
        cols = cols.reshape(-1)
    else:
        cols = np.zeros(len(amp), dtype=np.int64)
    return rows, cols, amp


def reduced_density(reg: QuditRegister, sites: Sequence[int]) -> DensityView:
    """Partial trace over every site not in ``sites``."""
    sites = tuple(sites)
    sub = tuple(reg.dims[s] for s in sites)
    dim = math.prod(sub)
    _check_cap(dim * dim, "density matrix")
    rows, cols, amp = _bipartite(reg, sites)
    m = sp.csr_matrix((amp, (rows, cols)), shape=(dim, int(cols.max(initial=0)) + 1))
    rho = (m @ m.conj().T).toarray()
    return DensityView(sites, sub, rho)


def site_fidelity(reg: QuditRegister, site: int, psi) -> float:
    """<psi| rho_site |psi> for a pure target state on one site."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    d = reg.dims[site]
    if psi.size < d:
        psi = np.concatenate([psi, np.zeros(d - psi.size)])
    rho = reduced_density(reg, [site]).matrix
    return float(np.real(psi.conj() @ rho @ psi))


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def distance(a: DensityView, b: DensityView) -> tuple[float, float]:
    """(fidelity, trace distance); fidelity is the squared Uhlmann form."""
    if a.matrix.shape != b.matrix.shape:
        raise ValueError(f"dimension mismatch {a.matrix.shape} vs {b.matrix.shape}")
    ra = _sqrtm_psd(a.matrix)
    inner = _sqrtm_psd(ra @ b.matrix @ ra)
    fid = float(np.real(np.trace(inner)) ** 2)
    td = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a.matrix - b.matrix))))
    return min(max(fid, 0.0), 1.0), min(max(td, 0.0), 1.0)


def reduced_trace_distance(a: QuditRegister, b: QuditRegister, sites: Sequence[int]) -> float:
    """Trace distance between the reduced states of ``a`` and ``b`` on ``sites``.

    Works without forming the reduced matrices. With M_a, M_b the states
    reshaped to (sites x rest), rho_a - rho_b = A J A^dagger where
    A = [M_a | M_b] and J = diag(1, -1). The difference is block diagonal
    over connected components of A's row/column incidence graph; each block's
    spectrum is read off a small SVD.
    """
    if a.dims != b.dims:
        raise ValueError("dimension mismatch")
    sites = list(sites)
    rest = [s for s in range(a.num_sites) if s not in sites]
    ia, aa = a.terms()
    ib, ab = b.terms()
    sub = [a.dims[s] for s in sites]
    rows_all = np.concatenate([_joint(ia[:, sites], sub), _joint(ib[:, sites], sub)])
    urows, rows = np.unique(rows_all, return_inverse=True)
    if rest:
        _, ca = np.unique(ia[:, rest], axis=0, return_inverse=True)
        _, cb = np.unique(ib[:, rest], axis=0, return_inverse=True)
        ca, cb = ca.reshape(-1), cb.reshape(-1)
    else:
        ca = np.zeros(len(aa), dtype=np.int64)
        cb = np.zeros(len(ab), dtype=np.int64)
    na = int(ca.max(initial=-1)) + 1
    cols = np.concatenate([ca, cb + na])
    ncols = na + int(cb.max(initial=-1)) + 1
    sign = np.concatenate([np.ones(na), -np.ones(ncols - na)])
    vals = np.concatenate([aa, ab])
    nrows = len(urows)

    graph = sp.coo_matrix(
        (np.ones(len(vals)), (rows, cols + nrows)), shape=(nrows + ncols,) * 2
    )
    _, label = connected_components(graph, directed=False)
    total = 0.0
    order = np.argsort(label[rows], kind="stable")
    comp_of_term = label[rows][order]
    bounds = np.flatnonzero(np.diff(comp_of_term)) + 1
    for chunk in np.split(order, bounds):
        r = rows[chunk]
        c = cols[chunk]
        ur, rr = np.unique(r, return_inverse=True)
        uc, cc = np.unique(c, return_inverse=True)
        block = np.zeros((len(ur), len(uc)), dtype=complex)
        np.add.at(block, (rr, cc), vals[chunk])
        j = sign[uc]
        if len(ur) <= len(uc):
            delta = (block * j) @ block.conj().T
            eig = np.linalg.eigvalsh(delta)
        else:
            u, s, vh = np.linalg.svd(block, full_matrices=False)
            core = (vh * j) @ vh.conj().T
            eig = np.linalg.eigvalsh(s[:, None] * core * s[None, :])
        total += float(np.sum(np.abs(eig)))
    return min(0.5 * total, 1.0)


# ---------------------------------------------------------- one-time pad


@dataclass(frozen=True)
class PauliKey:
    """Per-site exponents (a, b) of X^a Z^b."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def random(cls, dims: Sequence[int], rng: np.random.Generator) -> PauliKey:
        return cls(tuple((int(rng.integers(d)), int(rng.integers(d))) for d in dims))

    @classmethod
    def zero(cls, n: int) -> PauliKey:
        return cls(((0, 0),) * n)

    def bits_per_site(self, d: int) -> float:
        return 2 * math.log2(d)


def qotp_encrypt(reg: QuditRegister, sites: Sequence[int], key: PauliKey) -> QuditRegister:
    sites = list(sites)
    if len(key.pairs) != len(sites):
        raise ValueError(f"key has {len(key.pairs)} entries for {len(sites)} sites")
    for s, (a, b) in zip(sites, key.pairs):
        d = reg.dims[s]
        if not (0 <= a < d and 0 <= b < d):
            raise ValueError(f"key entry {(a, b)} out of range for dimension {d}")
        reg = apply_pauli(reg, s, a, b)
    return reg


def qotp_decrypt(reg: QuditRegister, sites: Sequence[int], key: PauliKey) -> QuditRegister:
    sites = list(sites)
    if len(key.pairs) != len(sites):
        raise ValueError(f"key has {len(key.pairs)} entries for {len(sites)} sites")
    for s, (a, b) in zip(sites, key.pairs):
        # (X^a Z^b)^-1 = Z^-b X^-a
        reg = apply_x(reg, s, -a)
        reg = apply_z(reg, s, -b)
    return reg
