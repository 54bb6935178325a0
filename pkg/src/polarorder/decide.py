"""Closed-form reliability-order decisions and their integer witnesses.

The central test: for positive reals m, n, the word 0^m 1^n dominates
1^m 0^n over every base capacity if and only if

    (1 - 2^(-2^m))^(2^n) <= 1/2,

i.e. checking the single capacity x = 1/2 settles the whole order for
pairs of this shape.  `capital_m` inverts the threshold: M(m) is the
least n for which the test passes, with closed form

    M(m) = log2(ln 2) - log2(-log(1 - 2^(-2^m)))

and asymptote M(m) -> 2^m + log2(ln 2) (about 2^m - 0.5288).

Consequences provided here:

* square:    0^m 1^M dominates 1^m 0^M for M = 2^m + log2(ln 2);
* lightning: for m > n > 0, with M = M(m), N = M(n), the pair
             0^m 1^(M+n) 0^N  vs  0^n 1^(N+m) 0^M holds, and so does
             the reduced pair 0^(m-n) 1^(M+n) vs 1^(N+m) 0^(M-N);
* dyck:      a bit string whose proper prefixes keep the capacity of a
             half-erased channel at or below 1/2 while the full string
             lifts it to at least 1/2 dominates its bitwise complement.

The dyck criterion is decided in exact rational arithmetic (the
hypotheses are exact inequalities at a dyadic point).  All threshold
work is done in nested-log space so m up to the hundreds is routine.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .words import CompareConfig, OrderVerdict, PolarWord, compare_words, eval_word_exact, complement

__all__ = [
    "MainVerdict",
    "decide_main",
    "capital_m",
    "square_pair",
    "lightning_claims",
    "DyckReport",
    "dyck_check",
    "enumerate_dyck",
    "LOG2_LN2",
    "BOUNDARY_BAND",
    "intro_pairs",
    "IntroPair",
]

LN2 = math.log(2.0)
LOG2_LN2 = math.log2(LN2)  # about -0.5288
BOUNDARY_BAND = 1e-12
_ASYMPTOTE_CUT = 1000.0  # beyond 2^m = 1000 the correction is below 1e-300


def _log_threshold_scale(m: float) -> float:
    """ln(-log(1 - 2^(-2^m))), stable for every positive m.

    For 2^m beyond the cut the inner quantity equals 2^(-2^m) to within
    a relative 2^(-2^m - 1), so its log is -2^m ln 2 exactly at double
    precision.
    """
    e = 2.0 ** m
    if e > _ASYMPTOTE_CUT:
        return -e * LN2
    s = -math.log1p(-(2.0 ** -e))
    return math.log(s)


@dataclass(frozen=True)
class MainVerdict:
    """Outcome of the half-point threshold test for 0^m 1^n vs 1^m 0^n."""

    m: float
    n: float
    threshold_value: float  # (1 - 2^(-2^m))^(2^n)
    holds: bool             # threshold_value <= 1/2
    boundary: bool          # within BOUNDARY_BAND of 1/2: holds is moot

    def to_json(self) -> str:
        return json.dumps(
            {
                "m": self.m,
                "n": self.n,
                "threshold": self.threshold_value,
                "relation": ("boundary" if self.boundary
                             else "holds" if self.holds else "fails"),
                "claim": f"0^{self.m:g} 1^{self.n:g} >= 1^{self.m:g} 0^{self.n:g}",
            },
            sort_keys=True,
        )


def decide_main(m: float, n: float) -> MainVerdict:
    """Decide 0^m 1^n >= 1^m 0^n via the half-point threshold.

    Works in log-log space: with D = n ln 2 + ln(-log(1 - 2^(-2^m))),
    the threshold is exp(-e^D) and the test D >= ln(ln 2) never suffers
    the under/overflow the direct power does.  Within BOUNDARY_BAND of
    1/2 the verdict is flagged `boundary` (floating comparison there is
    meaningless; the defining relation is an equality).
    """
    if not (m > 0 and n > 0):
        raise ValueError(f"decide_main needs positive m, n, got {m}, {n}")
    d = n * LN2 + _log_threshold_scale(m)
    # exp(-e^d): guard both exponentials
    if d > 709.0:
        threshold = 0.0
    else:
        threshold = math.exp(-math.exp(d)) if d > -709.0 else 1.0
    boundary = abs(threshold - 0.5) < BOUNDARY_BAND
    return MainVerdict(m=m, n=n, threshold_value=threshold,
                       holds=d >= math.log(LN2), boundary=boundary)


def capital_m(m: float) -> float:
    """The threshold exponent: the n solving (1 - 2^(-2^m))^(2^n) = 1/2."""
    if m <= 0:
        raise ValueError(f"capital_m needs m > 0, got {m}")
    return LOG2_LN2 - _log_threshold_scale(m) / LN2


def square_pair(m: float) -> tuple[PolarWord, PolarWord]:
    """The pair (0^m 1^M, 1^m 0^M) with M = 2^m + log2(ln 2).

    This M exceeds capital_m(m), so decide_main(m, M) holds for every
    m > 0 (for m > 0 the exponent M is always positive; a nonpositive M
    would be reported but cannot occur under the precondition).
    """
    if m <= 0:
        raise ValueError(f"square_pair needs m > 0, got {m}")
    M = 2.0 ** m + LOG2_LN2
    if M <= 0:
        import warnings

        warnings.warn(f"square exponent M={M} is nonpositive for m={m}",
                      UserWarning, stacklevel=2)
    left = PolarWord.from_pairs([(0, m), (1, M)])
    right = PolarWord.from_pairs([(1, m), (0, M)])
    return left, right


def lightning_claims(m: float, n: float) -> tuple[
        tuple[PolarWord, PolarWord], tuple[PolarWord, PolarWord]]:
    """The staircase-loop claims for m > n > 0.

    With M = capital_m(m) and N = capital_m(n), returns

        claim 1:  0^m 1^(M+n) 0^N  vs  0^n 1^(N+m) 0^M
        claim 2:  0^(m-n) 1^(M+n)  vs  1^(N+m) 0^(M-N)

    Both are comparison claims to be checked (for example by
    compare_words); neither is inferred from the other here.
    """
    if not m > n > 0:
        raise ValueError(f"lightning_claims needs m > n > 0, got {m}, {n}")
    M, N = capital_m(m), capital_m(n)
    claim1 = (
        PolarWord.from_pairs([(0, m), (1, M), (1, n), (0, N)]),
        PolarWord.from_pairs([(0, n), (1, N), (1, m), (0, M)]),
    )
    claim2 = (
        PolarWord.from_pairs([(0, m - n), (1, M + n)]),
        PolarWord.from_pairs([(1, N + m), (0, M - N)]),
    )
    return claim1, claim2


@dataclass(frozen=True)
class DyckReport:
    """Exact prefix test of a bit string at the half-erased channel."""

    bits: str
    satisfied: bool
    prefix_values: tuple[Fraction, ...]
    failing_prefix: Optional[int]  # 1-based length of the first bad prefix
    claim: Optional[tuple[PolarWord, PolarWord]]  # (word, complement) if satisfied

    def to_json(self) -> str:
        return json.dumps(
            {
                "bits": self.bits,
                "satisfied": self.satisfied,
                "prefix_values": [str(v) for v in self.prefix_values],
                "failing_prefix": self.failing_prefix,
                "claim": (f"{self.claim[0]} >= {self.claim[1]}"
                          if self.claim else None),
            },
            sort_keys=True,
        )


def dyck_check(bits) -> DyckReport:
    """Test the prefix criterion for a bit string against its complement.

    Every proper prefix must map 1/2 to at most 1/2 and the full string
    to at least 1/2, all in exact rational arithmetic.  When satisfied,
    the string dominates its bitwise complement and the claim pair is
    attached to the report.
    """
    s = "".join(str(int(b)) for b in bits)
    if len(s) <= 1:
        raise ValueError("dyck_check needs a bit string of length > 1")
    if any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    half = Fraction(1, 2)
    v = half
    values = []
    failing = None
    for i, c in enumerate(s):
        v = v * v if c == "0" else 1 - (1 - v) * (1 - v)
        values.append(v)
        last = i == len(s) - 1
        if not last and v > half:
            failing = i + 1
            break
        if last and v < half:
            failing = i + 1
    satisfied = failing is None
    word = PolarWord.from_bits(s)
    return DyckReport(
        bits=s,
        satisfied=satisfied,
        prefix_values=tuple(values),
        failing_prefix=failing,
        claim=(word, complement(word)) if satisfied else None,
    )


def enumerate_dyck(max_len: int) -> list[tuple[str, str]]:
    """All bit strings of length 2..max_len passing the prefix criterion.

    Returns (string, complement) pairs, ordered by length then
    lexicographically.  The prefix condition prunes the search tree:
    a prefix whose value exceeds 1/2 cannot be extended.
    """
    if not 2 <= max_len <= 20:
        raise ValueError("max_len must lie in [2, 20]")
    half = Fraction(1, 2)
    out = []

    def walk(prefix: str, value: Fraction):
        depth = len(prefix)
        if depth >= max_len:
            return
        for c, child in (("0", value * value),
                         ("1", 1 - (1 - value) * (1 - value))):
            s = prefix + c
            if len(s) >= 2 and child >= half:
                out.append(s)
            if child <= half:  # still extendable as a proper prefix
                walk(s, child)

    walk("", half)
    out.sort(key=lambda s: (len(s), s))
    return [(s, "".join("1" if c == "0" else "0" for c in s)) for s in out]


@dataclass(frozen=True)
class IntroPair:
    """An integer example pair with its associated sufficient criterion."""

    left: str
    right: str
    criterion: str   # "square" | "lightning" | "dyck"
    detail: str

    def words(self) -> tuple[PolarWord, PolarWord]:
        return PolarWord.from_bits(self.left), PolarWord.from_bits(self.right)


def _square_covers(a: int, b: int) -> bool:
    """0^a 1^b vs 1^a 0^b is implied by the square family iff b >= M_sq(a)."""
    return b >= 2.0 ** a + LOG2_LN2


def intro_pairs() -> list[IntroPair]:
    """The five classical example pairs and their criteria.

    square pairs are covered outright (b exceeds the square exponent).
    The dyck pair is certified by the exact prefix test.  The two
    lightning pairs are attested by the corollary at the witness
    (m, n) = (zero-run, one-run of the right word); the corollary's own
    claims and the integer pair are each checked numerically, since the
    reduction step between them is not mechanized here.
    """
    pairs = [
        IntroPair("011", "100", "square",
                  f"b=2 >= 2^1{LOG2_LN2:+.4f}"),
        IntroPair("00111", "10000", "lightning", "witness (m, n) = (2, 1)"),
        IntroPair("01011", "10100", "dyck", "exact prefix test"),
        IntroPair("001111", "110000", "square",
                  f"b=4 >= 2^2{LOG2_LN2:+.4f}"),
        IntroPair("000111", "100000", "lightning", "witness (m, n) = (3, 1)"),
    ]
    return pairs


def check_intro_pair(pair: IntroPair,
                     cfg: CompareConfig = CompareConfig()) -> dict:
    """Run a pair's criterion and the sampled comparison; returns a report."""
    lw, rw = pair.words()
    verdict = compare_words(lw, rw, cfg)
    if pair.criterion == "square":
        a = lw.segments[0].exponent
        b = lw.segments[1].exponent
        crit = _square_covers(int(a), int(b)) and decide_main(a, b).holds
    elif pair.criterion == "dyck":
        crit = dyck_check(pair.left).satisfied
    else:  # lightning: verify both corollary claims at the witness
        m = lw.segments[0].exponent
        n = rw.segments[0].exponent
        c1, c2 = lightning_claims(m, n)
        crit = (compare_words(*c1, cfg).holds and compare_words(*c2, cfg).holds)
    return {
        "pair": f"{pair.left} >= {pair.right}",
        "criterion": pair.criterion,
        "criterion_passed": bool(crit),
        "comparison": verdict,
    }
