"""Command-line front end.

Subcommands: coeff (exact a(n)), series (oracle expansion), ak (single HRR
coefficient by any engine), bound (truncation bound), selfcheck, bench.
Exit codes: 0 success, 1 internal error, 2 hypothesis failure, 3 bad
input or index.  Big integers print in full; JSON carries them as strings.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from fractions import Fraction

import gmpy2

from . import __version__
from .hrr import AkCache, akn_algorithm1, akn_definition, akn_kloosterman, hrr_reduce
from .kloosterman import HypothesisViolated
from .ntheory import dedekind_sum, dedekind_sum_naive
from .qseries import etaq_series
from .quotient import (ParseError, check_hypotheses, constants, normalize,
                       parse_spec, spec_from_json)
from .series import (Evaluator, IndexTooSmall, PrecisionExhausted,
                     StructuralZero, bessel_i, choose_truncation, error_bound,
                     evaluate)

EXIT_OK, EXIT_INTERNAL, EXIT_HYPOTHESIS, EXIT_BADINPUT = 0, 1, 2, 3


def _load_spec(arg: str):
    if os.path.exists(arg) or arg.endswith(".json"):
        with open(arg) as fh:
            return spec_from_json(fh.read())
    return parse_spec(arg)


def _print_json(obj):
    print(json.dumps(obj, sort_keys=True))


def _pref_str(e: int) -> str:
    return {0: "1", 1: "i", 2: "-1", 3: "-i"}[e % 4]


def cmd_coeff(args) -> int:
    spec = _load_spec(args.eta)
    ev = Evaluator(spec, threads=args.threads)
    rep = ev.coefficient(args.n, epsilon=Fraction(args.eps).limit_denominator(10**6),
                         prec_override=args.prec)
    if args.json:
        _print_json({
            "n": args.n, "value": str(rep.value), "N": rep.N, "prec_bits": rep.prec,
            "residual": rep.residual, "seconds": rep.wall_time,
            "n_internal": rep.n_internal, "terms_nonzero": rep.terms_nonzero,
            "bound": rep.bound_kind, "coordinates": rep.coordinates,
        })
    else:
        print(rep.value)
    return EXIT_OK


def cmd_series(args) -> int:
    spec = _load_spec(args.eta)
    n0_24, ser = etaq_series(spec, args.upto)
    if args.json:
        _print_json({"n0_times_24": n0_24, "coefficients": [str(c) for c in ser.coeffs]})
    else:
        for c in ser.coeffs:
            print(c)
    return EXIT_OK


def cmd_ak(args) -> int:
    spec = _load_spec(args.eta)
    nq = normalize(spec)
    prec = args.prec or 128
    meta = None
    if args.method == "definition":
        v = akn_definition(nq.base.pairs, args.k, args.n, prec)
    else:
        if args.method == "kloosterman":
            v = akn_kloosterman(nq, args.k, args.n, prec)
        else:
            v = akn_algorithm1(nq, args.k, args.n, prec, AkCache(prec))
        red = hrr_reduce(nq, args.k)
        meta = {
            "a": red.a, "b": red.b, "prefactor": _pref_str(red.prefactor_exp),
            "character": f"({red.kronecker_numerator()}/.)",
            "arguments": f"({red.a} - n, {red.b}; {args.k})",
        }
    vs = f"{gmpy2.mpfr(v):.29e}"
    if args.json:
        out = {"k": args.k, "n": args.n, "value": vs, "method": args.method}
        if meta:
            out["reduction"] = meta
        _print_json(out)
    else:
        print(vs)
        if meta:
            print(f"A_{args.k}(n) = {meta['prefactor']} * S_{meta['character']}{meta['arguments']}")
    return EXIT_OK


def cmd_bound(args) -> int:
    spec = _load_spec(args.eta)
    nq = normalize(spec)
    consts = constants(nq.base)
    n_int = nq.m0 * args.n
    if args.N is not None:
        v = error_bound(consts, n_int, args.N)
        if args.json:
            _print_json({"n": args.n, "n_internal": n_int, "N": args.N, "bound": float(v)})
        else:
            print(f"{v:.12e}")
    else:
        plan = choose_truncation(consts, n_int, Fraction(args.eps).limit_denominator(10**6))
        if args.json:
            _print_json({"n": args.n, "n_internal": n_int, "N": plan.N,
                         "bound": float(plan.bound_value), "epsilon": float(plan.epsilon)})
        else:
            print(plan.N)
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    import random
    from .kloosterman import KloostermanQuery, kloosterman_definition, kloosterman_fast
    rng = random.Random(7)
    failures = []

    def check(name, ok):
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
        if not ok:
            failures.append(name)

    ok = all(dedekind_sum(h, k) == dedekind_sum_naive(h, k)
             for k in range(1, 40) for h in range(k) if math.gcd(h, k) == 1)
    check("dedekind reciprocity vs naive (k < 40)", ok)

    ok = True
    for _ in range(40):
        k = rng.randrange(1, 60)
        a, b = rng.randrange(k), rng.randrange(k)
        d = kloosterman_definition(KloostermanQuery(a, b, k), 96)
        f = kloosterman_fast(KloostermanQuery(a, b, k), 96)
        if abs(d - f) > 1e-18 * (1 + abs(d)):
            ok = False
    check("kloosterman fast vs definition (random k < 60)", ok)

    ok = True
    for eta in ("1:-1", "1:-2,2:1"):
        nq = normalize(parse_spec(eta))
        cache = AkCache(128)
        for k in range(1, 30):
            for n in (0, 1, k // 2 + 1):
                d = akn_definition(nq.base.pairs, k, n, 128)
                a1 = akn_algorithm1(nq, k, n, 128, cache)
                if abs(d - a1) > 1e-25:
                    ok = False
    check("A_k algorithm vs definition (k < 30)", ok)

    ok = True
    _, ser = etaq_series(parse_spec("1:-1"), 30)
    ev = Evaluator(parse_spec("1:-1"))
    for n in range(1, 31):
        if ev.coefficient(n).value != ser.coeffs[n]:
            ok = False
    check("series evaluation vs q-series oracle (partitions, n <= 30)", ok)

    consts = constants(normalize(parse_spec("1:-5")).base)
    vals = [error_bound(consts, 24 * 50, N) for N in range(1, 40)]
    check("tail bound strictly decreasing", all(x > y for x, y in zip(vals, vals[1:])))

    return EXIT_OK if not failures else EXIT_INTERNAL


def cmd_bench(args) -> int:
    spec = _load_spec(args.eta)
    nq = normalize(spec)
    n_int = nq.m0 * args.n
    prec = args.prec or 128
    methods = args.methods.split(",")
    rows = {}
    for method in methods:
        t0 = time.perf_counter()
        cache = AkCache(prec)
        acc = 0.0
        for k in range(1, args.max_k + 1):
            if method == "definition":
                v = akn_definition(nq.base.pairs, k, n_int, prec)
            elif method == "kloosterman":
                v = akn_kloosterman(nq, k, n_int, prec)
            else:
                v = akn_algorithm1(nq, k, n_int, prec, cache)
            acc += float(v)
        rows[method] = {"seconds": time.perf_counter() - t0, "k_max": args.max_k,
                        "checksum": acc}
    if args.json:
        _print_json({"n": args.n, "n_internal": n_int, "prec_bits": prec, "methods": rows})
    else:
        print(f"{'method':<12} {'k <= ':<8} {'seconds':<12} checksum")
        for m, r in rows.items():
            print(f"{m:<12} {r['k_max']:<8} {r['seconds']:<12.4f} {r['checksum']:.6e}")
        if "definition" in rows and "algorithm1" in rows and rows["algorithm1"]["seconds"] > 0:
            print(f"speedup definition/algorithm1: "
                  f"{rows['definition']['seconds'] / rows['algorithm1']['seconds']:.1f}x")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="etaq",
        description="Exact Fourier coefficients of negative-weight eta-quotients.")
    ap.add_argument("--version", action="version", version=f"etaq {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_eta(p):
        p.add_argument("--eta", required=True,
                       help='quotient as "m:d,m:d,..." or a JSON config path')
        p.add_argument("--json", action="store_true", help="JSON output")

    p = sub.add_parser("coeff", help="exact coefficient a(n)")
    add_eta(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1, help="rounding safety margin")
    p.add_argument("--prec", type=int, default=None, help="working precision override (bits)")
    p.add_argument("--threads", type=int, default=max(1, os.cpu_count() or 1))
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("series", help="oracle q-series expansion a(0..N)")
    add_eta(p)
    p.add_argument("--upto", type=int, required=True)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("ak", help="one HRR coefficient A_k(n) (normalized quotient)")
    add_eta(p)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--method", choices=("definition", "kloosterman", "algorithm1"),
                   default="algorithm1")
    p.add_argument("--prec", type=int, default=None)
    p.set_defaults(func=cmd_ak)

    p = sub.add_parser("bound", help="tail bound M(n, N) or the minimal N")
    add_eta(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-N", type=int, default=None)
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("selfcheck", help="run reduced invariant suites")
    p.set_defaults(func=cmd_selfcheck)

    p = sub.add_parser("bench", help="A_k timing: definition vs fast engines")
    add_eta(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--max-k", type=int, default=400, dest="max_k")
    p.add_argument("--methods", default="definition,algorithm1")
    p.add_argument("--prec", type=int, default=None)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HypothesisViolated as e:
        print(f"error: hypothesis failure: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ParseError, StructuralZero, IndexTooSmall, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BADINPUT
    except PrecisionExhausted as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
