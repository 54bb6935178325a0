"""Fractional polarization words over binary erasure channels.

A binary erasure channel is fully described by its capacity x in [0, 1].
One polar-transform step synthesizes two channels from it; on capacities
the two maps are

    0-map:  x -> x^2         (the degraded channel)
    1-map:  x -> 1 - (1-x)^2 (the upgraded channel)

Both maps embed into continuous one-parameter families,

    step0(x, p) = x^(2^p),            step1(x, q) = 1 - (1-x)^(2^q),

which agree with the classical maps at p = q = 1 and compose additively
in the exponent within each family.  A *word* is a finite sequence of
segments 0^p / 1^q denoting left-to-right composition of these maps.
Words with unit exponents recover ordinary polar bit-strings: "011" maps
x to the capacity of the subchannel indexed by bits 0,1,1.

`compare_words` decides the pointwise reliability order a >= b over
x in [0, 1] by dense sampling plus local refinement.  Its verdict is
numerical evidence, not a proof, and says so.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "Segment",
    "PolarWord",
    "parse_word",
    "step0",
    "step1",
    "eval_word",
    "eval_word_array",
    "eval_word_exact",
    "complement",
    "CompareConfig",
    "OrderVerdict",
    "compare_words",
]


@dataclass(frozen=True)
class Segment:
    """One maximal run of a word: `bit` in {0, 1}, real nonzero `exponent`."""

    bit: int
    exponent: float

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"segment bit must be 0 or 1, got {self.bit!r}")
        if not math.isfinite(self.exponent):
            raise ValueError("segment exponent must be finite")

    def __str__(self):
        if self.exponent == 1:
            return str(self.bit)
        if self.exponent == int(self.exponent) and abs(self.exponent) < 1e15:
            return f"{self.bit}^{int(self.exponent)}"
        return f"{self.bit}^{self.exponent!r}"  # repr round-trips exactly


def _canonical(segments: Iterable[Segment]) -> tuple[Segment, ...]:
    """Merge adjacent same-bit segments and drop zero exponents (stack pass)."""
    out: list[Segment] = []
    for seg in segments:
        if seg.exponent == 0:
            continue
        while out and out[-1].bit == seg.bit:
            seg = Segment(seg.bit, out.pop().exponent + seg.exponent)
        if seg.exponent != 0:
            out.append(seg)
        elif out:
            # a cancellation may expose two mergeable neighbours; redo the tail
            seg = out.pop()
            while out and out[-1].bit == seg.bit:
                seg = Segment(seg.bit, out.pop().exponent + seg.exponent)
            if seg.exponent != 0:
                out.append(seg)
    return tuple(out)


@dataclass(frozen=True)
class PolarWord:
    """A canonical sequence of segments 0^p / 1^q, applied left to right.

    Canonical form has no zero exponents and no two adjacent segments with
    the same bit; 0^p 0^r is identified with 0^(p+r).  The empty word is
    the identity map.
    """

    segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "segments", _canonical(self.segments))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "PolarWord":
        return cls(tuple(Segment(b, float(e)) for b, e in pairs))

    @classmethod
    def from_bits(cls, bits: Iterable[int | str]) -> "PolarWord":
        return cls.from_pairs((int(b), 1.0) for b in bits)

    def pairs(self) -> tuple[tuple[int, float], ...]:
        return tuple((s.bit, s.exponent) for s in self.segments)

    @property
    def has_negative_exponent(self) -> bool:
        return any(s.exponent < 0 for s in self.segments)

    def total_mass(self) -> float:
        """Sum of absolute exponents (size measure for the exact evaluator)."""
        return sum(abs(s.exponent) for s in self.segments)

    def __len__(self):
        return len(self.segments)

    def __str__(self):
        return " ".join(str(s) for s in self.segments)

    def __repr__(self):
        return f"PolarWord({str(self)!r})"


_SEG_RE = re.compile(
    r"\s*([01])(?:\s*\^\s*\{?\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*\}?)?\s*,?"
)


def parse_word(text: str) -> PolarWord:
    """Parse a word like "011", "0^1.5 1^2", or "0^2 0^3 1^1" (merges to 0^5 1).

    Grammar: one or more segments, each a bit optionally followed by
    ^REAL (braces around the real allowed); separators are optional
    whitespace or commas.  Bare bits mean exponent 1.  Explicit zero
    exponents are accepted and dropped.  The empty string parses to the
    empty word.
    """
    pos = 0
    pairs: list[tuple[int, float]] = []
    while pos < len(text):
        m = _SEG_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"syntax error in word at position {pos}: {text[pos:pos+12]!r}")
        bit = int(m.group(1))
        exp = float(m.group(2)) if m.group(2) is not None else 1.0
        pairs.append((bit, exp))
        pos = m.end()
    return PolarWord.from_pairs(pairs)


def _check_capacity(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"capacity must lie in [0, 1], got {x}")
    return float(x)


def step0(x: float, p: float) -> float:
    """x -> x^(2^p).  Fixes 0 and 1; p = 0 is the identity exactly."""
    x = _check_capacity(x)
    if p == 0 or x == 0.0 or x == 1.0:
        return x
    return math.exp((2.0 ** p) * math.log(x))


def step1(x: float, q: float) -> float:
    """x -> 1 - (1-x)^(2^q), evaluated as -expm1(2^q * log1p(-x)).

    The expm1/log1p form transports the complement channel through the
    0-map, which stays accurate when x is close to 1 (where the direct
    subtraction cancels catastrophically).
    """
    x = _check_capacity(x)
    if q == 0 or x == 0.0 or x == 1.0:
        return x
    return -math.expm1((2.0 ** q) * math.log1p(-x))


def eval_word(w: PolarWord, x: float) -> float:
    """Left-to-right composition of step0/step1 over the word's segments."""
    x = _check_capacity(x)
    for seg in w.segments:
        x = step0(x, seg.exponent) if seg.bit == 0 else step1(x, seg.exponent)
    return x


def eval_word_array(w: PolarWord, xs: np.ndarray) -> np.ndarray:
    """Vectorized eval_word on an array of capacities in [0, 1]."""
    xs = np.asarray(xs, dtype=float)
    if np.any((xs < 0) | (xs > 1)):
        raise ValueError("capacities must lie in [0, 1]")
    out = xs.copy()
    interior = (out > 0.0) & (out < 1.0)
    v = out[interior]
    for seg in w.segments:
        scale = 2.0 ** seg.exponent
        if seg.bit == 0:
            v = np.exp(scale * np.log(v))
        else:
            v = -np.expm1(scale * np.log1p(-v))
    out[interior] = v
    return out


def eval_word_exact(w: PolarWord, x: Fraction, mass_cap: int = 24) -> Fraction:
    """Exact rational evaluation; requires nonnegative integer exponents.

    Denominators grow like 2^(2^mass), so the total exponent mass is
    capped (default 24, giving at most multi-megabit integers).
    Negative exponents would leave the rationals (they take roots).
    """
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError("capacity must lie in [0, 1]")
    exps = []
    for seg in w.segments:
        e = seg.exponent
        if e != int(e):
            raise ValueError(f"exact mode needs integer exponents, got {e}")
        if e < 0:
            raise ValueError("exact mode cannot take roots: negative exponent %g" % e)
        exps.append(int(e))
    if sum(exps) > mass_cap:
        raise ValueError(f"total exponent mass {sum(exps)} exceeds cap {mass_cap}")
    for seg, e in zip(w.segments, exps):
        if seg.bit == 0:
            x = x ** (2 ** e)
        else:
            x = 1 - (1 - x) ** (2 ** e)
    return x


def complement(w: PolarWord) -> PolarWord:
    """Flip every segment's bit, keeping exponents."""
    return PolarWord.from_pairs((1 - b, e) for b, e in w.pairs())


@dataclass(frozen=True)
class CompareConfig:
    """Sampling plan for compare_words.

    samples: number of Chebyshev-distributed points in (0, 1); these
    cluster near both endpoints, where every word flattens and uniform
    grids lose resolution.
    tolerance: the verdict is "holds" when the refined minimum gap is
    >= -tolerance.
    refine_maxiter: iteration budget per local-minimum refinement.
    """

    samples: int = 4097
    tolerance: float = 1e-12
    refine_maxiter: int = 80


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of a sampled order comparison between two words."""

    holds: bool
    min_gap: float
    witness: Optional[float]
    samples_used: int
    note: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "relation": "holds" if self.holds else "fails",
                "min_gap": self.min_gap,
                "witness": self.witness,
                "samples_used": self.samples_used,
                "note": self.note,
            },
            sort_keys=True,
        )


def chebyshev_points(n: int) -> np.ndarray:
    """n Chebyshev-distributed points in the open interval (0, 1)."""
    k = np.arange(1, n + 1)
    return 0.5 * (1.0 - np.cos(k * np.pi / (n + 1)))


def compare_words(a: PolarWord, b: PolarWord, cfg: CompareConfig = CompareConfig()) -> OrderVerdict:
    """Numerically test whether a >= b pointwise on [0, 1].

    Evaluates d(x) = eval(a, x) - eval(b, x) on the Chebyshev sample set,
    then refines every local minimum by bracketed scalar minimization.
    The verdict is sampled numerical evidence, not a proof.
    """
    note = "sampled numerical evidence, not a proof"
    if a.has_negative_exponent or b.has_negative_exponent:
        msg = "order semantics are only established for positive-exponent words"
        warnings.warn(msg, UserWarning, stacklevel=2)
        note += "; " + msg

    xs = chebyshev_points(cfg.samples)
    d = eval_word_array(a, xs) - eval_word_array(b, xs)

    def gap(x: float) -> float:
        return eval_word(a, x) - eval_word(b, x)

    i_min = int(np.argmin(d))
    min_gap, witness = float(d[i_min]), float(xs[i_min])

    # candidate minima: weak local minima with at least one strictly higher
    # neighbour (plateaus of exactly tied values would otherwise flood the
    # refinement stage); refine the lowest few plus the global minimum
    prev = np.r_[np.inf, d[:-1]]
    nxt = np.r_[d[1:], np.inf]
    cand = np.flatnonzero((prev >= d) & (nxt >= d) & ((prev > d) | (nxt > d)))
    if cand.size > 16:
        cand = cand[np.argsort(d[cand])[:16]]
    if i_min not in cand:
        cand = np.append(cand, i_min)
    for i in cand:
        lo = xs[i - 1] if i > 0 else 0.0
        hi = xs[i + 1] if i < cfg.samples - 1 else 1.0
        res = minimize_scalar(
            gap, bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-14, "maxiter": cfg.refine_maxiter},
        )
        if res.fun < min_gap:
            min_gap, witness = float(res.fun), float(res.x)

    return OrderVerdict(
        holds=min_gap >= -cfg.tolerance,
        min_gap=min_gap,
        witness=witness,
        samples_used=cfg.samples,
        note=note,
    )
