"""Eta-quotient model: parsing, normalization to 24 | m, and the series constants.

A quotient is a finite set of pairs (m, d_m), d_m != 0, representing
prod_m eta(q^m)^{d_m}.  The Kloosterman reduction of the A_k needs every m
divisible by 24, which is arranged by rescaling q -> q^{m0} (the shifted
quotient carries the same coefficients, spread out by m0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .ntheory import factorize


class ParseError(ValueError):
    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class DuplicateModulus(ParseError):
    pass


class ZeroExponent(ParseError):
    pass


@dataclass(frozen=True)
class EtaQuotientSpec:
    pairs: tuple  # ((m, d), ...) sorted by m, all m >= 1, all d != 0

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("eta-quotient needs at least one pair")
        for m, d in self.pairs:
            if m < 1:
                raise ValueError(f"modulus {m} must be >= 1")
            if d == 0:
                raise ZeroExponent(f"zero exponent at modulus {m}")
        ms = [m for m, _ in self.pairs]
        if len(set(ms)) != len(ms):
            raise DuplicateModulus("repeated modulus")
        if list(ms) != sorted(ms):
            raise ValueError("pairs must be sorted by modulus")

    def label(self) -> str:
        return ",".join(f"{m}:{d}" for m, d in self.pairs)


def make_spec(pairs) -> EtaQuotientSpec:
    return EtaQuotientSpec(tuple(sorted((int(m), int(d)) for m, d in pairs)))


def parse_spec(text: str) -> EtaQuotientSpec:
    """Parse "m:d,m:d,..." (m unsigned, d signed decimal)."""
    pairs = []
    pos = 0
    src = text.strip()
    if not src:
        raise ParseError("empty eta-quotient", 0)
    for chunk in src.split(","):
        body = chunk.strip()
        if ":" not in body:
            raise ParseError(f"expected m:d pair, got {body!r}", pos)
        ms, ds = body.split(":", 1)
        try:
            m = int(ms)
            if ms.strip().startswith(("-", "+")):
                raise ValueError
        except ValueError:
            raise ParseError(f"bad modulus {ms!r}", pos) from None
        try:
            d = int(ds)
        except ValueError:
            raise ParseError(f"bad exponent {ds!r}", pos + len(ms) + 1) from None
        if m < 1:
            raise ParseError(f"modulus must be >= 1, got {m}", pos)
        if d == 0:
            raise ZeroExponent(f"zero exponent at modulus {m}")
        if any(m == m2 for m2, _ in pairs):
            raise DuplicateModulus(f"repeated modulus {m}")
        pairs.append((m, d))
        pos += len(chunk) + 1
    return make_spec(pairs)


def spec_from_json(text: str) -> EtaQuotientSpec:
    """Config schema: {"eta": [[m, d], ...], "label": "..."} (label optional)."""
    obj = json.loads(text)
    if not isinstance(obj, dict) or "eta" not in obj:
        raise ParseError('config must be an object with an "eta" array')
    return make_spec(obj["eta"])


@dataclass(frozen=True)
class NormalizedQuotient:
    original: EtaQuotientSpec
    base: EtaQuotientSpec  # every m divisible by 24
    m0: int  # coefficient index scale: b(m0*n) = a(n)


def normalize(spec: EtaQuotientSpec) -> NormalizedQuotient:
    """Minimal rescale q -> q^{m0} making 24 | m for every m."""
    m0 = 1
    for m, _ in spec.pairs:
        m0 = math.lcm(m0, 24 // math.gcd(24, m))
    base = make_spec([(m0 * m, d) for m, d in spec.pairs])
    return NormalizedQuotient(original=spec, base=base, m0=m0)


def index_map(nq: NormalizedQuotient, n_user: int) -> int:
    return nq.m0 * n_user


def _sqrt_exact(r: Fraction):
    """sqrt(r) for positive rational r, as (rational, squarefree) with
    value = rational * sqrt(squarefree)."""
    num, den = r.numerator, r.denominator
    inner = num * den  # sqrt(r) = sqrt(num*den)/den
    f, s = 1, 1
    for p, e in factorize(inner).items():
        f *= p ** (e // 2)
        if e % 2:
            s *= p
    return Fraction(f, den), s


def _cmp_exact_sqrt(a, b):
    # compare f1*sqrt(s1) vs f2*sqrt(s2), both positive
    (f1, s1), (f2, s2) = a, b
    lhs = f1 * f1 * s1
    rhs = f2 * f2 * s2
    return (lhs > rhs) - (lhs < rhs)


@dataclass(frozen=True)
class QuotientConstants:
    spec: EtaQuotientSpec
    c1: Fraction
    n0: Fraction
    periodM: int
    c3: tuple  # Fractions, index k-1 for k = 1..M
    c4: tuple  # Fractions
    c2_exact: tuple  # (Fraction, squarefree int) pairs
    C3: Fraction
    C2_exact: tuple
    prec: int

    def c2_value(self, k: int, prec: int | None = None):
        f, s = self.c2_exact[(k - 1) % self.periodM]
        with gmpy2.context(precision=prec or self.prec):
            return gmpy2.mpfr(f.numerator) / f.denominator * gmpy2.sqrt(gmpy2.mpfr(s))

    def C2_value(self, prec: int | None = None):
        f, s = self.C2_exact
        with gmpy2.context(precision=prec or self.prec):
            return gmpy2.mpfr(f.numerator) / f.denominator * gmpy2.sqrt(gmpy2.mpfr(s))

    def c3_at(self, k: int) -> Fraction:
        return self.c3[(k - 1) % self.periodM]

    def c4_at(self, k: int) -> Fraction:
        return self.c4[(k - 1) % self.periodM]


def constants(spec: EtaQuotientSpec, prec: int = 96) -> QuotientConstants:
    """All series constants for k = 1..M, exact where possible.

    c3 and c4 are exact rationals; c2 involves square roots and is kept as
    an exact (rational, squarefree) pair so the maximum C2 is selected
    without float ties.
    """
    pairs = spec.pairs
    c1 = -Fraction(sum(d for _, d in pairs), 2)
    n0 = -Fraction(sum(m * d for m, d in pairs), 24)
    M = 1
    for m, _ in pairs:
        M = math.lcm(M, m)
    c3s, c4s, c2s = [], [], []
    for k in range(1, M + 1):
        g2m = [(Fraction(math.gcd(m, k) ** 2, m), m, d) for m, d in pairs]
        c3 = -sum(d * f for f, _, d in g2m)
        c4 = min(f for f, _, _ in g2m) - c3 / 24
        r = Fraction(1)
        for f, m, d in g2m:
            r *= Fraction(math.gcd(m, k), m) ** d
        c3s.append(c3)
        c4s.append(c4)
        c2s.append(_sqrt_exact(r))
    positive = [i for i in range(M) if c3s[i] > 0]
    if positive:
        C3 = max(c3s[i] for i in positive)
        C2 = max((c2s[i] for i in positive), key=lambda p: p[0] * p[0] * p[1])
    else:
        C3, C2 = Fraction(0), (Fraction(0), 1)
    return QuotientConstants(
        spec=spec, c1=c1, n0=n0, periodM=M,
        c3=tuple(c3s), c4=tuple(c4s), c2_exact=tuple(c2s),
        C3=C3, C2_exact=C2, prec=prec,
    )


@dataclass(frozen=True)
class HypothesisReport:
    c1: Fraction
    c1_positive: bool
    c4_nonnegative: bool
    n0_integral: bool
    positive_c3_residues: tuple  # k in 1..M with c3(k) > 0
    failures: tuple

    @property
    def certified(self) -> bool:
        """Hypotheses of the convergence/error machinery all hold."""
        return not self.failures

    @property
    def evaluable(self) -> bool:
        """Series evaluation is possible (c1 = 0 runs without a certified bound)."""
        return self.c4_nonnegative and self.c1 >= 0


def check_hypotheses(consts: QuotientConstants) -> HypothesisReport:
    c1_pos = consts.c1 > 0
    c4_ok = all(v >= 0 for v in consts.c4)
    n0_int = consts.n0.denominator == 1
    pos = tuple(k for k in range(1, consts.periodM + 1) if consts.c3[k - 1] > 0)
    failures = []
    if not c1_pos:
        failures.append(f"c1 > 0 fails (c1 = {consts.c1})")
    if not c4_ok:
        bad = next(k for k in range(1, consts.periodM + 1) if consts.c4[k - 1] < 0)
        failures.append(f"c4(k) >= 0 fails at k = {bad} (c4 = {consts.c4[bad - 1]})")
    if not pos:
        failures.append("c3(k) > 0 holds for no k: empty series")
    return HypothesisReport(
        c1=consts.c1, c1_positive=c1_pos, c4_nonnegative=c4_ok,
        n0_integral=n0_int, positive_c3_residues=pos, failures=tuple(failures),
    )
