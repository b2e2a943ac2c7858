"""Arithmetic over prime fields GF(q)."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def inv(a: int, q: int) -> int:
    a %= q
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse in GF({q})")
    return pow(a, q - 2, q)


def poly_eval(coeffs: Sequence[int], x: int, q: int) -> int:
    """Evaluate sum(coeffs[i] * x**i) mod q (Horner)."""
    y = 0
    for c in reversed(coeffs):
        y = (y * x + c) % q
    return y


def _poly_mul_linear(p: list[int], root: int, q: int) -> list[int]:
    # p(x) * (x - root)
    out = [0] * (len(p) + 1)
    for i, c in enumerate(p):
        out[i] = (out[i] - root * c) % q
        out[i + 1] = (out[i + 1] + c) % q
    return out


def interpolate(points: Sequence[tuple[int, int]], q: int) -> list[int]:
    """Coefficients (lowest degree first) of the unique polynomial of degree
    < len(points) through ``points`` over GF(q).

    Raises ValueError on an empty point list or repeated x values.
    """
    if not points:
        raise ValueError("need at least one point")
    xs = [x % q for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValueError(f"repeated x value in {xs}")
    k = len(points)
    coeffs = [0] * k
    for i, (xi, yi) in enumerate(points):
        basis = [1]
        denom = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = _poly_mul_linear(basis, xj, q)
            denom = denom * (xi - xj) % q
        scale = yi * inv(denom, q) % q
        for d, c in enumerate(basis):
            coeffs[d] = (coeffs[d] + scale * c) % q
    return coeffs


def vandermonde(xs: Sequence[int], k: int, q: int) -> np.ndarray:
    """Rows [1, x, x^2, ..., x^(k-1)] mod q."""
    return np.array([[pow(int(x), j, q) for j in range(k)] for x in xs], dtype=np.int64)


def mat_inv(m: np.ndarray, q: int) -> np.ndarray:
    """Inverse of a square matrix over GF(q) by Gauss-Jordan elimination."""
    m = np.asarray(m, dtype=np.int64) % q
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    aug = np.concatenate([m, np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r, col] % q), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(%d)" % q)
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] = aug[col] * inv(int(aug[col, col]), q) % q
        for r in range(n):
            if r != col and aug[r, col]:
                aug[r] = (aug[r] - aug[r, col] * aug[col]) % q
    return aug[:, n:]
