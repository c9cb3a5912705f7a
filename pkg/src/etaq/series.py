"""Series evaluation: Bessel factors, truncation bounds, exact coefficients.

The tail bound M(n, N) is the uniform one (constants C2, C3); it certifies
rounding once M(n, N) < 1/2 - epsilon.  For quotients whose normalized
constants make that N astronomically large (the weight -1/2 rows), the
same proof applied per residue class r mod M gives the refined bound
_error_bound_classes, which reduces to the uniform formula when M = 1 and
is what evaluate() falls back to beyond `paper_bound_cap`.  Weight-0
quotients have no convergent bound of this shape (the v = 0 term of the
tail integral turns logarithmic), so they run uncertified with a strict
residual check; the q-series oracle pins them in the tests.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .hrr import AkCache, akn_algorithm1, akn_definition
from .ntheory import workctx
from .kloosterman import HypothesisViolated
from .quotient import (EtaQuotientSpec, NormalizedQuotient, QuotientConstants,
                       check_hypotheses, constants, normalize)


class PrecisionExhausted(RuntimeError):
    pass


class StructuralZero(ValueError):
    """The requested index is outside the support of the coefficient sequence."""


class IndexTooSmall(ValueError):
    """Series evaluation needs n > n0; small indices belong to the oracle."""


def bessel_i(nu, x, prec: int = 128):
    """Modified Bessel I_nu(x) for half-integer nu >= 1, x > 0.

    Plain power series: all terms positive, truncated when the next term
    drops below 2^-prec of the partial sum.  Gamma values come from upward
    recurrence off Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).
    """
    nu = Fraction(nu)
    if nu < 1 or nu.denominator not in (1, 2):
        raise ValueError("order must be a half-integer >= 1")
    num, den = nu.numerator, nu.denominator
    work = prec + 32
    with workctx(work):
        x = mpfr(x)
        if x <= 0:
            raise ValueError("argument must be positive")
        half = x / 2
        # Gamma(nu + 1) by upward recurrence off Gamma(1) = 1, Gamma(1/2) = sqrt(pi)
        if den == 1:
            g = mpfr(math.prod(range(1, num + 1)))
        else:
            g = gmpy2.sqrt(gmpy2.const_pi()) * math.prod(range(1, num + 1, 2)) / mpfr(2) ** ((num + 1) // 2)
        lead = half ** (num // den)
        if den == 2:
            lead *= gmpy2.sqrt(half)
        term = lead / g
        total = term
        h2 = half * half
        nu_f = mpfr(num) / den
        m = 1
        eps = mpfr(2) ** (-(prec + 8))
        while term > total * eps:
            term = term * h2 / ((nu_f + m) * m)
            total += term
            m += 1
    with workctx(prec):
        return +total


def _b_of(consts: QuotientConstants, c3: Fraction, n_internal, prec: int):
    # pi * sqrt((2/3) c3 (n - n0))
    nn = Fraction(n_internal) - consts.n0
    with workctx(prec):
        return gmpy2.const_pi() * gmpy2.sqrt(
            mpfr((Fraction(2, 3) * c3 * nn).numerator) / (Fraction(2, 3) * c3 * nn).denominator)


def error_bound(consts: QuotientConstants, n_internal: int, N: int, prec: int = 96):
    """The uniform tail bound M(n, N); strictly decreasing in N.

    Raises HypothesisViolated when c1 <= 0 (no bound of this shape exists).
    """
    prec = max(prec, 96)
    c1 = consts.c1
    if c1 <= 0:
        raise HypothesisViolated(f"tail bound needs c1 > 0, got c1 = {c1}")
    if Fraction(n_internal) <= consts.n0:
        raise ValueError("need n > n0")
    with workctx(prec):
        c1f = mpfr(c1.numerator) / c1.denominator
        C2 = consts.C2_value(prec)
        C3 = mpfr(consts.C3.numerator) / consts.C3.denominator
        b = _b_of(consts, consts.C3, n_internal, prec)
        lead = 2 * gmpy2.const_pi() * C2 / c1f * (gmpy2.const_pi() * C3 / 12) ** (1 + c1f)
        return lead * (N + 1 + c1f) / mpfr(N + 1) ** (1 + c1f) * gmpy2.cosh(b / (N + 1))


def _class_weights(consts: QuotientConstants, prec: int):
    """Per-distinct-c3 data for the refined bound: (sum of c2 over classes,
    (pi c3/12)^(1+c1), pi sqrt((2/3) c3))."""
    groups: dict = {}
    for r in range(1, consts.periodM + 1):
        c3 = consts.c3[r - 1]
        if c3 <= 0:
            continue
        groups.setdefault(c3, []).append(r)
    out = []
    c1 = consts.c1
    with workctx(prec):
        c1f = mpfr(c1.numerator) / c1.denominator
        for c3, rs in sorted(groups.items()):
            c2sum = mpfr(0)
            for r in rs:
                c2sum += consts.c2_value(r, prec)
            w = (gmpy2.const_pi() * mpfr(c3.numerator) / c3.denominator / 12) ** (1 + c1f)
            alpha = gmpy2.const_pi() * gmpy2.sqrt(mpfr((Fraction(2, 3) * c3).numerator)
                                                  / (Fraction(2, 3) * c3).denominator)
            out.append((c2sum, w, alpha))
    return out


def _error_bound_classes(consts: QuotientConstants, weights, n_internal, N: int, prec: int = 96):
    """Refined tail bound with per-residue-class constants; same proof as
    error_bound with the k-sum restricted to each class mod M (and the
    integral comparison picking up a 1/M).  Equals error_bound at M = 1."""
    c1 = consts.c1
    if c1 <= 0:
        raise HypothesisViolated(f"tail bound needs c1 > 0, got c1 = {c1}")
    M = consts.periodM
    nn = Fraction(n_internal) - consts.n0
    with workctx(prec):
        c1f = mpfr(c1.numerator) / c1.denominator
        sq = gmpy2.sqrt(mpfr(nn.numerator) / nn.denominator)
        tot = mpfr(0)
        for c2sum, w, alpha in weights:
            tot += c2sum * w * gmpy2.cosh(alpha * sq / (N + 1))
        return 2 * gmpy2.const_pi() * (N + 1 + M * c1f) / (M * c1f * mpfr(N + 1) ** (1 + c1f)) * tot


@dataclass(frozen=True)
class TruncationPlan:
    n_internal: int
    N: int
    epsilon: Fraction
    bound_value: object  # mpfr
    prec: int
    bound_kind: str = "uniform"


def _minimal_N(f, target) -> int:
    # minimal N >= 1 with f(N) < target, by doubling then bisection
    # (valid since f is strictly decreasing)
    N = 1
    while not f(N) < target:
        N *= 2
        if N > 1 << 40:
            raise PrecisionExhausted("tail bound does not drop below target")
    lo, hi = N // 2, N  # f(hi) < target <= f(lo) (or hi == 1)
    while hi - lo > 1 and lo >= 1:
        mid = (lo + hi) // 2
        if f(mid) < target:
            hi = mid
        else:
            lo = mid
    return hi


def choose_truncation(consts: QuotientConstants, n_internal: int,
                      epsilon: Fraction = Fraction(1, 10), prec: int = 96) -> TruncationPlan:
    """Minimal N with M(n, N) < 1/2 - epsilon (uniform bound)."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2)")
    with workctx(prec):
        target = mpfr(Fraction(1, 2) - epsilon)
    N = _minimal_N(lambda N: error_bound(consts, n_internal, N, prec), target)
    return TruncationPlan(n_internal=n_internal, N=N, epsilon=epsilon,
                          bound_value=error_bound(consts, n_internal, N, prec), prec=prec)


@dataclass(frozen=True)
class EvaluationReport:
    n_user: int
    n_internal: int
    N: int
    prec: int
    value: int
    residual: float
    terms_nonzero: int
    wall_time: float
    bound_kind: str
    coordinates: str  # "normalized" or "original"


_LOG2E = 1.4426950408889634


class Evaluator:
    """Coefficient evaluator for one eta-quotient; caches survive across calls.

    Weight -c1 < 0 quotients run on the normalized form with a certified
    truncation; weight-0 quotients run on the original form with the
    uncertified heuristic truncation (see module docstring).
    """

    PAPER_BOUND_CAP = 200_000

    def __init__(self, spec: EtaQuotientSpec, threads: int = 1):
        self.spec = spec
        self.nq = normalize(spec)
        self.consts = constants(self.nq.base)
        self.report = check_hypotheses(self.consts)
        self.threads = max(1, threads)
        self.c1 = self.consts.c1
        if self.c1 == 0:
            self.consts_orig = constants(spec)
            self.report_orig = check_hypotheses(self.consts_orig)
        self._caches: dict = {}       # prec -> AkCache (normalized pipeline)
        self._defn_cache: dict = {}   # (k, n mod k, prec) -> mpfr (original pipeline)
        self._weights: dict = {}      # prec -> refined-bound weights
        self._support_gcd = math.gcd(*[m for m, _ in spec.pairs])

    # -- hypothesis gate ----------------------------------------------------
    def _gate(self):
        rep = self.report if self.c1 != 0 else self.report_orig
        if self.c1 < 0:
            raise HypothesisViolated(f"c1 > 0 fails (c1 = {self.c1}); series does not converge")
        if not rep.c4_nonnegative:
            raise HypothesisViolated(next(f for f in rep.failures if "c4" in f))
        if not rep.positive_c3_residues:
            raise HypothesisViolated("c3(k) > 0 holds for no k: empty series")

    # -- constants at working precision --------------------------------------
    def _tables(self, consts: QuotientConstants, prec: int):
        M = consts.periodM
        expo = (consts.c1 + 1) / 2
        with workctx(prec):
            ef = mpfr(expo.numerator) / expo.denominator
            c2 = [consts.c2_value(r, prec) if consts.c3[r - 1] > 0 else None
                  for r in range(1, M + 1)]
            c3pow = [None] * M
            alpha = [None] * M
            for r in range(1, M + 1):
                c3 = consts.c3[r - 1]
                if c3 <= 0:
                    continue
                c3f = mpfr(c3.numerator) / c3.denominator
                c3pow[r - 1] = c3f ** ef
                alpha[r - 1] = gmpy2.const_pi() * gmpy2.sqrt(
                    mpfr(2 * c3.numerator) / (3 * c3.denominator))
        return c2, c3pow, alpha

    def _working_prec(self, consts: QuotientConstants, n_internal, N: int) -> int:
        env = os.environ.get("ETAQ_HRR_PREC")
        if env:
            return max(64, int(env))
        nn = Fraction(n_internal) - consts.n0
        x_max = 0.0
        for k in range(1, min(N, consts.periodM) + 1):
            c3 = consts.c3[(k - 1) % consts.periodM]
            if c3 <= 0:
                continue
            x = math.pi / k * math.sqrt(float(Fraction(2, 3) * c3 * nn))
            x_max = max(x_max, x)
        return int(math.ceil(x_max * _LOG2E)) + N.bit_length() + 64

    # -- A_k engines ----------------------------------------------------------
    def _ak_normalized(self, k: int, n_internal: int, prec: int):
        cache = self._caches.get(prec)
        if cache is None:
            cache = self._caches[prec] = AkCache(prec)
        return akn_algorithm1(self.nq, k, n_internal, prec, cache)

    def _ak_original(self, k: int, n: int, prec: int):
        key = (k, n % k, prec)
        v = self._defn_cache.get(key)
        if v is None:
            v = self._defn_cache[key] = akn_definition(self.spec.pairs, k, n, prec)
        return v

    # -- main entry -----------------------------------------------------------
    def coefficient(self, n_user: int, epsilon: Fraction = Fraction(1, 10),
                    prec_override: int | None = None) -> EvaluationReport:
        self._gate()
        g = self._support_gcd
        if g > 1 and n_user % g:
            raise StructuralZero(
                f"coefficient a({n_user}) is structurally zero: the index must be a multiple of {g}")
        if self.c1 > 0:
            return self._eval_certified(n_user, Fraction(epsilon), prec_override)
        return self._eval_heuristic(n_user, Fraction(epsilon), prec_override)

    def _sum_terms(self, consts, n_internal, N, prec, ak, tables):
        """Partial sum over k <= N with c3(k) > 0, ascending-k summation."""
        c2, c3pow, alpha, sqnn = tables
        M = consts.periodM

        nu = consts.c1 + 1

        def term_of(k):
            r = (k - 1) % M
            if c3pow[r] is None:
                return None
            a = ak(k, n_internal, prec)
            if a == 0:
                return 0
            x = alpha[r] * sqnn / k
            return c2[r] * c3pow[r] / k * a * bessel_i(nu, x, prec)

        if self.threads > 1:
            chunk = max(64, N // (8 * self.threads))
            blocks = [range(s, min(s + chunk, N + 1)) for s in range(1, N + 1, chunk)]

            def run_block(blk):
                with workctx(prec):
                    return [term_of(k) for k in blk]

            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(run_block, blocks))
            terms = [t for blk in results for t in blk]
        else:
            with workctx(prec):
                terms = [term_of(k) for k in range(1, N + 1)]
        with workctx(prec):
            total = mpfr(0)
            nonzero = 0
            for t in terms:
                if t is None or t == 0:
                    continue
                nonzero += 1
                total += t
        return total, nonzero

    def _finish(self, consts, n_internal, total, prec):
        expo = (consts.c1 + 1) / 2
        nn = Fraction(n_internal) - consts.n0
        with workctx(prec):
            ef = mpfr(expo.numerator) / expo.denominator
            base = mpfr((24 * nn).numerator) / (24 * nn).denominator
            s = 2 * gmpy2.const_pi() / base**ef * total
            value = int(gmpy2.floor(s + mpfr(1) / 2))
            residual = abs(s - value)
        return value, residual

    def _eval_certified(self, n_user, epsilon, prec_override):
        t0 = time.perf_counter()
        consts = self.consts
        n_int = self.nq.m0 * n_user
        if Fraction(n_int) <= consts.n0:
            raise IndexTooSmall(f"series needs n > n0 = {consts.n0}; use the q-series for n <= n0")
        with workctx(96):
            target = mpfr(Fraction(1, 2) - epsilon)
        N_uniform = _minimal_N(lambda N: error_bound(consts, n_int, N), target)
        if N_uniform <= self.PAPER_BOUND_CAP:
            N, kind = N_uniform, "uniform"
        else:
            w = self._weights.get(96)
            if w is None:
                w = self._weights[96] = _class_weights(consts, 96)
            N = _minimal_N(lambda N: _error_bound_classes(consts, w, n_int, N), target)
            kind = "residue-classes"
        prec = prec_override or self._working_prec(consts, n_int, N)
        for attempt in range(2):
            with workctx(prec):
                sqnn = gmpy2.sqrt(mpfr((Fraction(n_int) - consts.n0).numerator)
                                  / (Fraction(n_int) - consts.n0).denominator)
            tables = (*self._tables(consts, prec), sqnn)
            total, nonzero = self._sum_terms(consts, n_int, N, prec, self._ak_normalized, tables)
            value, residual = self._finish(consts, n_int, total, prec)
            if residual < Fraction(1, 2) - epsilon:
                return EvaluationReport(
                    n_user=n_user, n_internal=n_int, N=N, prec=prec, value=value,
                    residual=float(residual), terms_nonzero=nonzero,
                    wall_time=time.perf_counter() - t0, bound_kind=kind,
                    coordinates="normalized")
            prec *= 2
        raise PrecisionExhausted(f"residual {residual} at doubled precision")

    def _eval_heuristic(self, n_user, epsilon, prec_override):
        t0 = time.perf_counter()
        consts = self.consts_orig
        n_int = n_user
        if Fraction(n_int) <= consts.n0:
            raise IndexTooSmall(f"series needs n > n0 = {consts.n0}")
        b = float(_b_of(consts, consts.C3, n_int, 64))
        N = max(48, int(2 * b) + 48)
        prec = prec_override or self._working_prec(consts, n_int, N)
        for attempt in range(4):
            with workctx(prec):
                sqnn = gmpy2.sqrt(mpfr((Fraction(n_int) - consts.n0).numerator)
                                  / (Fraction(n_int) - consts.n0).denominator)
            tables = (*self._tables(consts, prec), sqnn)
            total, nonzero = self._sum_terms(consts, n_int, N, prec, self._ak_original, tables)
            value, residual = self._finish(consts, n_int, total, prec)
            if residual < Fraction(1, 4):
                return EvaluationReport(
                    n_user=n_user, n_internal=n_int, N=N, prec=prec, value=value,
                    residual=float(residual), terms_nonzero=nonzero,
                    wall_time=time.perf_counter() - t0, bound_kind="heuristic",
                    coordinates="original")
            if attempt < 2:
                N *= 2
            else:
                prec *= 2
        raise PrecisionExhausted(f"residual {residual} after enlarging N and precision")


def evaluate(spec, n_user: int, epsilon: Fraction = Fraction(1, 10),
             prec_override: int | None = None, threads: int = 1) -> EvaluationReport:
    """One-shot coefficient evaluation; build an Evaluator for sweeps."""
    if isinstance(spec, NormalizedQuotient):
        spec = spec.original
    return Evaluator(spec, threads=threads).coefficient(
        n_user, epsilon=epsilon, prec_override=prec_override)
