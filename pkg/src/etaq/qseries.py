"""Exact q-series expansion of eta-quotients: the ground-truth oracle.

Truncated power series over Python ints.  Multiplication is schoolbook
O(N^2) and inversion is the linear recurrence from the constant term; both
are exact.  euler_product uses the pentagonal number expansion, and
series_inv skips zero coefficients of the divisor, so expanding a typical
eta-quotient to a few thousand terms stays cheap.
"""

from __future__ import annotations

from dataclasses import dataclass


class NotInvertibleSeries(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients c[0..N] of a power series mod q^(N+1)."""

    coeffs: tuple
    N: int

    def __post_init__(self):
        if len(self.coeffs) != self.N + 1:
            raise ValueError("coefficient array must have length N + 1")

    def __getitem__(self, j):
        return self.coeffs[j]


def series_one(N: int) -> TruncatedSeries:
    return TruncatedSeries((1,) + (0,) * N, N)


def euler_product(N: int) -> TruncatedSeries:
    """prod_{j>=1} (1 - q^j) mod q^(N+1), by the pentagonal number theorem."""
    if N < 0:
        raise ValueError("N must be >= 0")
    c = [0] * (N + 1)
    c[0] = 1
    m = 1
    while True:
        p1 = m * (3 * m - 1) // 2
        p2 = m * (3 * m + 1) // 2
        if p1 > N and p2 > N:
            break
        s = -1 if m % 2 else 1
        if p1 <= N:
            c[p1] += s
        if p2 <= N:
            c[p2] += s
        m += 1
    return TruncatedSeries(tuple(c), N)


def series_mul(sA: TruncatedSeries, sB: TruncatedSeries, N: int) -> TruncatedSeries:
    a, b = sA.coeffs, sB.coeffs
    c = [0] * (N + 1)
    for i, ai in enumerate(a[: N + 1]):
        if ai == 0:
            continue
        top = min(N - i, len(b) - 1)
        for j in range(top + 1):
            if b[j]:
                c[i + j] += ai * b[j]
    return TruncatedSeries(tuple(c), N)


def series_inv(s: TruncatedSeries, N: int) -> TruncatedSeries:
    """Inverse mod q^(N+1); requires constant term +-1."""
    a0 = s.coeffs[0]
    if a0 not in (1, -1):
        raise NotInvertibleSeries("constant term must be +-1")
    support = [(j, s.coeffs[j]) for j in range(1, min(s.N, N) + 1) if s.coeffs[j]]
    b = [0] * (N + 1)
    b[0] = a0
    for n in range(1, N + 1):
        t = 0
        for j, aj in support:
            if j > n:
                break
            t += aj * b[n - j]
        b[n] = -a0 * t
    return TruncatedSeries(tuple(b), N)


def series_pow(s: TruncatedSeries, e: int, N: int) -> TruncatedSeries:
    """s^e mod q^(N+1); negative e goes through series_inv."""
    if e < 0:
        return series_pow(series_inv(s, N), -e, N)
    out = series_one(N)
    base = TruncatedSeries(tuple(s.coeffs[: N + 1]) + (0,) * max(0, N - s.N), N)
    while e:
        if e & 1:
            out = series_mul(out, base, N)
        base = series_mul(base, base, N) if e > 1 else base
        e >>= 1
    return out


def _scale_exponents(s: TruncatedSeries, m: int, N: int) -> TruncatedSeries:
    c = [0] * (N + 1)
    for j, v in enumerate(s.coeffs):
        if v and j * m <= N:
            c[j * m] = v
    return TruncatedSeries(tuple(c), N)


def etaq_series(spec, N: int):
    """Coefficients a(0..N) of q^{n0} eta^delta(q), plus 24*n0.

    spec is an EtaQuotientSpec (anything with .pairs of (m, d)).  The n0
    shift is returned times 24 so callers never touch fractions.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    n0_24 = -sum(m * d for m, d in spec.pairs)
    out = series_one(N)
    base = euler_product(N)
    for m, d in spec.pairs:
        scaled = base if m == 1 else _scale_exponents(euler_product(N // m), m, N)
        out = series_mul(out, series_pow(scaled, d, N), N)
    return n0_24, out
