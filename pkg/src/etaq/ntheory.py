"""Exact integer / rational number theory used by every other module.

Everything here is pure and exact: Python ints, fractions.Fraction, no
floating point.  Dedekind sums are the arithmetically delicate piece; the
fast reciprocity evaluation is cross-checked against the O(k) defining sum
in the test suite.
"""

from __future__ import annotations

import math
from fractions import Fraction

import gmpy2


class NotInvertible(ValueError):
    pass


def egcd(a: int, b: int):
    """Extended Euclid: returns (g, x, y) with g = gcd(a,b) >= 0 and a*x + b*y = g."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def mod_inverse(a: int, m: int) -> int:
    """Inverse of a modulo m >= 1, in [0, m).  mod_inverse(a, 1) == 0."""
    if m < 1:
        raise ValueError("modulus must be >= 1")
    if m == 1:
        return 0
    g, x, _ = egcd(a % m, m)
    if g != 1:
        raise NotInvertible(f"{a} is not invertible modulo {m}")
    return x % m


def crt(residues):
    """Solve a simultaneous congruence system.

    residues is an iterable of (r_i, m_i) with m_i >= 1, not necessarily
    coprime.  Returns (r, L) with L = lcm(m_i) and r in [0, L), or None when
    the system is incompatible.
    """
    r, L = 0, 1
    for ri, mi in residues:
        if mi < 1:
            raise ValueError("moduli must be >= 1")
        g = math.gcd(L, mi)
        if (ri - r) % g:
            return None
        L2 = L // g * mi
        t = ((ri - r) // g * mod_inverse(L // g, mi // g)) % (mi // g) if mi > g else 0
        r = (r + L * t) % L2
        L = L2
    return r, L


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), the full extension of the Legendre symbol."""
    return int(gmpy2.kronecker(a, n))


def valuation(n: int, p: int) -> int:
    """Largest e with p^e | n; n must be nonzero."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def _sqrt_mod_prime(a: int, p: int) -> int | None:
    """Tonelli-Shanks square root mod an odd prime, deterministic."""
    a %= p
    if a == 0:
        return 0
    if kronecker(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # p = 1 mod 4: full Tonelli-Shanks with the least quadratic nonresidue
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while kronecker(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        r = r * b % p
    return r


def sqrt_mod_prime_power(a: int, p: int, alpha: int):
    """Some c with c*c = a (mod p^alpha) and 0 < c < p^alpha, or None.

    Requires gcd(a, p) = 1.  Odd p: Tonelli-Shanks then Hensel lifting.
    p = 2: solvable for alpha >= 3 iff a = 1 (mod 8); lifted bit by bit.
    """
    q = p**alpha
    a %= q
    if math.gcd(a, p) != 1:
        raise ValueError("sqrt_mod_prime_power requires gcd(a, p) = 1")
    if p == 2:
        if alpha == 1:
            return 1
        if alpha == 2:
            return 1 if a % 4 == 1 else None
        if a % 8 != 1:
            return None
        c = 1
        # c^2 = a (mod 2^e) implies c or c + 2^(e-1) works mod 2^(e+1)
        for e in range(3, alpha):
            if (c * c - a) % (1 << (e + 1)):
                c += 1 << (e - 1)
        return c % q
    c = _sqrt_mod_prime(a, p)
    if c is None:
        return None
    pe = p
    while pe < q:
        pe2 = min(pe * pe, q)
        c = (c - (c * c - a) * mod_inverse(2 * c, pe2)) % pe2
        pe = pe2
    return c


def dedekind_sum(h: int, k: int) -> Fraction:
    """Dedekind sum s(h, k) as an exact rational, via the reciprocity law.

    O(log k) Fraction operations.  Arguments are reduced with s(qa, qk) =
    s(a, k) and s(h + k, k) = s(h, k) first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    h %= k
    if k == 1 or h == 0:
        return Fraction(0)
    g = math.gcd(h, k)
    if g > 1:
        h //= g
        k //= g
        if k == 1 or h == 0:
            return Fraction(0)
    s = Fraction(0)
    sign = 1
    # s(h,k) + s(k,h) = -1/4 + (h^2 + k^2 + 1)/(12hk), Euclid on (h, k)
    while h > 1:
        s += sign * (Fraction(-1, 4) + Fraction(h * h + k * k + 1, 12 * h * k))
        sign = -sign
        h, k = k % h, h
        if h == 0:
            return s
    # s(1, k) = (k - 1)(k - 2)/(12k)
    return s + sign * Fraction((k - 1) * (k - 2), 12 * k)


def _sawtooth(x: Fraction) -> Fraction:
    # ((x)) = x - floor(x) - 1/2 for non-integer x, else 0
    if x.denominator == 1:
        return Fraction(0)
    return x - math.floor(x) - Fraction(1, 2)


def dedekind_sum_naive(h: int, k: int) -> Fraction:
    """Literal O(k) evaluation of the defining sum; test oracle for dedekind_sum."""
    if k < 1:
        raise ValueError("k must be >= 1")
    total = Fraction(0)
    for j in range(1, k):
        total += _sawtooth(Fraction(j, k)) * _sawtooth(Fraction(h * j, k))
    return total


# ---------------------------------------------------------------------------
# factorization helpers (trial division with a shared sieve, Pollard rho for
# anything that survives; k values in this artifact stay well below 10^6)

_CTX: dict = {}


def workctx(prec: int):
    """Reusable gmpy2 context at the given precision (creation is not free)."""
    c = _CTX.get(prec)
    if c is None:
        c = _CTX[prec] = gmpy2.context(precision=prec)
    return c


_SPF: list[int] = []


def _grow_sieve(limit: int) -> None:
    global _SPF
    if len(_SPF) > limit:
        return
    limit = max(limit + 1, 2 * len(_SPF), 1 << 10)
    spf = list(range(limit))
    for i in range(2, math.isqrt(limit - 1) + 1):
        if spf[i] == i:
            for j in range(i * i, limit, i):
                if spf[j] == j:
                    spf[j] = i
    _SPF = spf


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, 50):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"failed to factor {n}")


from functools import lru_cache


@lru_cache(maxsize=1 << 16)
def factorize_t(n: int) -> tuple:
    """Prime factorization of n >= 1 as a sorted tuple ((p, e), ...)."""
    if n < 1:
        raise ValueError("factorize requires n >= 1")
    out: dict[int, int] = {}
    if n < 1 << 22:
        _grow_sieve(n)
        while n > 1:
            p = _SPF[n]
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        return tuple(sorted(out.items()))
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if gmpy2.is_prime(m):
            p = int(m)
            if p not in out:
                out[p] = valuation(n, p)
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return tuple(sorted(out.items()))


def factorize(n: int) -> dict[int, int]:
    """Prime factorization {p: e} of n >= 1."""
    return dict(factorize_t(n))
