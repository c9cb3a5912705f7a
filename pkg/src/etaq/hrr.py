"""HRR coefficients A_k(n): definition oracle, Kloosterman reduction,
multiplicativity splitting, and the full prime-power evaluation loop.

A_k(n) is the exponential sum over residues h coprime to k whose phase
combines hn/k with Dedekind sums; the reduction rewrites it exactly as
i^c * psi(1) * S_{chi rho}(a - n, b; k) with (a, b, c, chi, rho) depending
on k and the quotient only.  The constant c follows the congruence proof
(the exponent delta_m multiplies the whole (k_m - 3)/2 term); this reading
is locked by the definition-oracle sweep in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr

from .kloosterman import KloostermanQuery, QuadCharacter, kloosterman_fast
from .ntheory import (crt, dedekind_sum, factorize, factorize_t, kronecker,
                      mod_inverse, valuation, workctx)


class InternalInconsistency(RuntimeError):
    pass


class NoSolution(RuntimeError):
    pass


# kronecker(d2, h) on h = 1, 3, 5, 7 for the four characters modulo 8
_D2_TABLES = {
    (1, 1, 1, 1): 1,
    (1, -1, 1, -1): -1,
    (1, -1, -1, 1): 2,
    (1, 1, -1, -1): -2,
}


@dataclass(frozen=True)
class HrrReduction:
    k: int
    a: int
    b: int
    prefactor_exp: int  # i^prefactor_exp absorbs i^c * psi(1)
    chi: QuadCharacter

    def kronecker_numerator(self) -> int:
        return self.chi.kronecker_numerator()


def _val2(n: int) -> int:
    return (n & -n).bit_length() - 1 if n else 0


@lru_cache(maxsize=None)
def hrr_reduce_pairs(pairs: tuple, k: int) -> HrrReduction:
    """The (a, b, c, chi rho) data with A_k(n) = i^c psi(1) S(a-n, b; k).

    pairs must be normalized (24 | m for every m).
    """
    for m, _ in pairs:
        if m % 24:
            raise ValueError("reduction needs a normalized quotient (24 | m)")
    lam = _val2(k)
    kodd = k >> lam
    mod3k = 3 * kodd  # 3k / 2^lam
    mod2 = 1 << (3 + lam)
    a1 = b1 = a2 = b2 = 0
    c = 0
    psi_terms = []  # (m_k, first_selector, second_selector), odd delta & even k_m only
    chi_par: dict[int, int] = {}
    for m, d in pairs:
        g = math.gcd(m, k)
        km = k // g
        mk = m // g
        lam_m = _val2(km)
        kpm = km >> lam_m
        if km % 3 == 0:
            um = 1
        else:
            um = crt([(1, km), (0, 3)])[0]
        vm = mod_inverse(mk, (3 if km % 3 == 0 else 1) * km)
        a1 -= d * um * m
        b1 -= d * um * vm * g
        if km % 2 == 0:
            wm = mod_inverse(mk, mod2)
            a2 -= d * m
            b2 -= d * wm * g * (km * km + 3 * km + 1)
            c += d * kronecker(mk, kpm)
        else:
            c += d * ((km - 3) // 2)
            c += d * kronecker(-mk, kpm)
        if d % 2:
            if km % 2 == 0:
                psi_terms.append((mk, kpm % 4 == 1, lam_m % 2 == 1))
            for p, e in factorize(kpm).items():
                if e % 2:
                    chi_par[p] = chi_par.get(p, 0) ^ 1
    if a1 % 3 or b1 % 3 or a2 % 8 or b2 % 8:
        raise InternalInconsistency("divisibility of a1, b1, a2, b2 failed")
    t1 = crt([(1, mod3k), (0, mod2)])[0]
    t2 = crt([(1, mod2), (0, mod3k)])[0]
    mod24k = 24 * k
    ta = (t1 * a1 + t2 * a2) % mod24k
    tb = (t1 * b1 + t2 * b2) % mod24k
    if ta % 24 or tb % 24:
        raise InternalInconsistency("t1*a1 + t2*a2 not divisible by 24")
    a = (ta // 24) % k
    b = (tb // 24) % k

    def psi(h: int) -> int:
        v = 1
        for mk, sel1, sel2 in psi_terms:
            hm = h * mk
            if sel1 and (hm - 1) // 2 % 2:
                v = -v
            if sel2 and (hm * hm - 1) // 8 % 2:
                v = -v
        return v

    psi1 = psi(1)
    rho_tab = tuple(psi1 * psi(h) for h in (1, 3, 5, 7))
    d2 = _D2_TABLES.get(rho_tab)
    if d2 is None:
        raise InternalInconsistency(f"psi(1)psi(h) table {rho_tab} is not a character mod 8")
    chi = QuadCharacter(tuple(sorted(p for p, v in chi_par.items() if v)), d2)
    pref = (c + (2 if psi1 < 0 else 0)) % 4
    return HrrReduction(k=k, a=a, b=b, prefactor_exp=pref, chi=chi)


def hrr_reduce(nq, k: int) -> HrrReduction:
    return hrr_reduce_pairs(nq.base.pairs, k)


# ---------------------------------------------------------------------------
# definition oracle

@lru_cache(maxsize=1024)
def _definition_phases(pairs: tuple, k: int):
    """n-free phase parts: tuples (h, S_h) with S_h = (1/2) sum_m d_m s(...),
    for 1 <= h <= k/2 coprime to k."""
    out = []
    for h in range(1, k // 2 + 1):
        if math.gcd(h, k) != 1:
            continue
        s = Fraction(0)
        for m, d in pairs:
            g = math.gcd(m, k)
            s += Fraction(d, 2) * dedekind_sum(m * h // g, k // g)
        out.append((h, s))
    return tuple(out)


def akn_definition(spec_or_pairs, k: int, n: int, prec: int = 128):
    """A_k(n) by the defining sum, using exact Dedekind sums.

    Exponents are exact rationals (denominator dividing 24k) reduced mod 1
    before any floating point enters.  Real by the h <-> -h pairing.
    """
    pairs = spec_or_pairs if isinstance(spec_or_pairs, tuple) else spec_or_pairs.pairs
    if k == 1:
        with workctx(prec):
            return mpfr(1)
    with workctx(prec):
        pi2 = 2 * gmpy2.const_pi()
        tot = mpfr(0)
        for h, s in _definition_phases(pairs, k):
            e = Fraction(h * n, k) + s
            e -= math.floor(e)
            term = gmpy2.cos(pi2 * mpfr(e.numerator) / e.denominator)
            tot += term if 2 * h == k else 2 * term
        return tot


# ---------------------------------------------------------------------------
# multiplicativity (splitting A_{k1 k2} into A_{k1} * A_{k2})

def u_bridge(spec_or_pairs, k1: int, k2: int) -> int:
    """The exact integer u(k1, k2) entering the index congruences."""
    pairs = spec_or_pairs if isinstance(spec_or_pairs, tuple) else spec_or_pairs.pairs
    if math.gcd(k1, k2) != 1:
        raise ValueError("k1, k2 must be coprime")
    u = 0
    for m, d in pairs:
        g1 = math.gcd(m, k1)
        g2 = math.gcd(m, k2)
        g12 = math.gcd(m, k1 * k2)
        u += m * d * (k1 * k1 // (g1 * g1) + k2 * k2 // (g2 * g2)
                      - (k1 * k2) ** 2 // (g12 * g12) - 1)
    return u


_THETA_PAIRS = ((1, 24), (2, 12), (3, 8), (4, 6), (6, 4), (8, 3), (12, 2), (24, 1))


@lru_cache(maxsize=None)
def _split_data(pairs: tuple, k1: int, k2: int):
    """n-free part of the splitting: (ell, u, theta1, theta2) or None when
    the ell-system is incompatible."""
    congruences = []
    for m, _ in pairs:
        g1 = math.gcd(m, k1)
        g2 = math.gcd(m, k2)
        congruences.append((g1 * g1, k2 // g2))
        congruences.append((g2 * g2, k1 // g1))
    sol = crt(congruences)
    if sol is None:
        return None
    ell, L = sol
    k = k1 * k2
    while math.gcd(ell, k) != 1 or ell == 0:
        ell += L
        if ell > k * 24 + L:
            return None  # no unit representative (cannot happen for valid systems)
    # theta1 * theta2 = 24 with gcd(theta1 k1, theta2 k2) = 1: 8 goes to the
    # even side, 3 to the side divisible by 3, default theta1
    t8 = 2 if k2 % 2 == 0 else 1
    t3 = 2 if k2 % 3 == 0 else 1
    theta1 = (8 if t8 == 1 else 1) * (3 if t3 == 1 else 1)
    theta2 = 24 // theta1
    if math.gcd(theta1 * k1, theta2 * k2) != 1:
        for theta1, theta2 in _THETA_PAIRS:
            if math.gcd(theta1 * k1, theta2 * k2) == 1:
                break
        else:
            return None
    return ell, u_bridge(pairs, k1, k2), theta1, theta2


def _solve_linear(coeff: int, rhs: int, mod: int) -> int:
    """Least positive n with coeff * n = rhs (mod mod)."""
    g = math.gcd(coeff, mod)
    if rhs % g:
        raise NoSolution(f"{coeff} n = {rhs} (mod {mod}) has no solution")
    mod2 = mod // g
    if mod2 == 1:
        return 1
    x = (rhs // g) * mod_inverse(coeff // g, mod2) % mod2
    return x if x else mod2


def mult_split(nq_or_pairs, k1: int, k2: int, n: int):
    """Some (ell, n1, n2) with A_{k1 k2}(n) = A_{k1}(n1) A_{k2}(n2), or None
    when the congruence system for ell is incompatible."""
    pairs = nq_or_pairs if isinstance(nq_or_pairs, tuple) else nq_or_pairs.base.pairs
    if k1 <= 1 or k2 <= 1 or math.gcd(k1, k2) != 1:
        raise ValueError("need coprime k1, k2 > 1")
    data = _split_data(pairs, k1, k2)
    if data is None:
        return None
    ell, u, theta1, theta2 = data
    rhs = ell * (24 * n - u)
    n1 = _solve_linear(24 * k2 * k2, rhs, theta1 * k1)
    n2 = _solve_linear(24 * k1 * k1, rhs, theta2 * k2)
    return ell, n1, n2


# ---------------------------------------------------------------------------
# Kloosterman route and the evaluation loop

_IMAG_TOL: dict = {}


def akn_kloosterman(nq, k: int, n: int, prec: int = 128):
    """A_k(n) via the reduction to a twisted Kloosterman sum."""
    red = hrr_reduce(nq, k)
    s = kloosterman_fast(KloostermanQuery((red.a - n) % k, red.b, k, red.chi), prec)
    tol = _IMAG_TOL.get(prec)
    if tol is None:
        tol = _IMAG_TOL[prec] = gmpy2.exp2(-(prec // 2))
    with workctx(prec):
        v = mpc(0, 1) ** red.prefactor_exp * s
        if abs(v.imag) >= tol * (1 + abs(v.real)):
            raise InternalInconsistency(f"A_{k}({n}) has imaginary part {v.imag}")
        return v.real


class AkCache:
    """Values A_k(n) keyed by (k, n mod k), plus the prime-power memo.

    Deterministic values, so concurrent last-writer-wins races are benign.
    """

    def __init__(self, prec: int):
        self.prec = prec
        self.ak: dict = {}

    def get(self, k: int, n: int):
        return self.ak.get((k, n % k))

    def put(self, k: int, n: int, value):
        self.ak[(k, n % k)] = value
        return value


def akn_algorithm1(nq, k: int, n: int, prec: int = 128, cache: AkCache | None = None):
    """A_k(n) by peeling prime powers through the multiplicativity theorem,
    with the Kloosterman route on whatever refuses to split.

    Returns 0 early as soon as any factor vanishes.
    """
    if cache is None:
        cache = AkCache(prec)
    if k == 1:
        with workctx(prec):
            return mpfr(1)
    hit = cache.get(k, n)
    if hit is not None:
        return hit
    pairs = nq.base.pairs
    remaining = sorted(p**e for p, e in factorize_t(k))
    n3 = n
    k2 = k
    factors = []
    while len(remaining) > 1:
        for q in remaining:
            split = mult_split(pairs, q, k2 // q, n3)
            if split is not None:
                _, n1, n2 = split
                factors.append((q, n1))
                remaining.remove(q)
                k2 //= q
                n3 = n2
                break
        else:
            break
    with workctx(prec):
        value = mpfr(1)
        tail = [(k2, n3)] if k2 > 1 else []
        for kk, nn in factors + tail:
            sub = cache.get(kk, nn)
            if sub is None:
                sub = cache.put(kk, nn, akn_kloosterman(nq, kk, nn, prec))
            if sub == 0:
                return cache.put(k, n, mpfr(0))
            value *= sub
        return cache.put(k, n, value)
