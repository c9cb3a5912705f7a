"""Exact Fourier coefficients of negative-weight eta-quotients.

The coefficient a(n) of prod_m eta(q^m)^{d_m} is computed by a convergent
Rademacher-type series whose arithmetic factors A_k(n) are evaluated fast
through twisted Kloosterman sums and multiplicativity, with a rigorously
bounded truncation error; an exact big-integer q-series expansion serves
as the independent oracle.
"""

from .hrr import (AkCache, HrrReduction, akn_algorithm1, akn_definition,
                  akn_kloosterman, hrr_reduce, mult_split, u_bridge)
from .kloosterman import (HypothesisViolated, KloostermanQuery, QuadCharacter,
                          char_eval, kloosterman_definition, kloosterman_fast,
                          prime_power_eval, selberg_reduce)
from .ntheory import (crt, dedekind_sum, dedekind_sum_naive, egcd, kronecker,
                      mod_inverse, sqrt_mod_prime_power, valuation)
from .qseries import TruncatedSeries, etaq_series, euler_product, series_inv, series_mul, series_pow
from .quotient import (EtaQuotientSpec, NormalizedQuotient, check_hypotheses,
                       constants, index_map, make_spec, normalize, parse_spec,
                       spec_from_json)
from .series import (EvaluationReport, Evaluator, IndexTooSmall,
                     PrecisionExhausted, StructuralZero, TruncationPlan,
                     bessel_i, choose_truncation, error_bound, evaluate)

__version__ = "0.1.0"

__all__ = [
    "AkCache", "EtaQuotientSpec", "EvaluationReport", "Evaluator",
    "HrrReduction", "HypothesisViolated", "IndexTooSmall", "KloostermanQuery",
    "NormalizedQuotient", "PrecisionExhausted", "QuadCharacter",
    "StructuralZero", "TruncatedSeries", "TruncationPlan",
    "akn_algorithm1", "akn_definition", "akn_kloosterman", "bessel_i",
    "char_eval", "check_hypotheses", "choose_truncation", "constants", "crt",
    "dedekind_sum", "dedekind_sum_naive", "egcd", "error_bound", "etaq_series",
    "euler_product", "evaluate", "hrr_reduce", "index_map", "kloosterman_definition",
    "kloosterman_fast", "kronecker", "make_spec", "mod_inverse", "mult_split",
    "normalize", "parse_spec", "prime_power_eval", "selberg_reduce",
    "series_inv", "series_mul", "series_pow", "spec_from_json",
    "sqrt_mod_prime_power", "u_bridge", "valuation",
]
