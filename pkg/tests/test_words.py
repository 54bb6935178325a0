import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from polarorder.words import (
    CompareConfig,
    PolarWord,
    compare_words,
    complement,
    eval_word,
    eval_word_array,
    eval_word_exact,
    parse_word,
    step0,
    step1,
)

# exact value of the composition 0 1 0 1 1 at x = 1/2, frozen from an
# independent rational evaluation (prefix chain 1/4, 7/16, 49/256,
# 22687/65536, then this)
EXACT_01011 = Fraction(2458930495, 4294967296)


def random_word(rng, max_segments=6, allow_negative=False, hi=2.5):
    n = rng.integers(1, max_segments + 1)
    pairs = []
    for _ in range(n):
        e = rng.uniform(0.1, hi)
        if allow_negative and rng.random() < 0.3:
            e = -e
        pairs.append((int(rng.integers(0, 2)), e))
    return PolarWord.from_pairs(pairs)


class TestParse:
    def test_unit_bits_merge(self):
        assert parse_word("011").pairs() == ((0, 1.0), (1, 2.0))

    def test_explicit_exponents(self):
        assert parse_word("0^1.5 1^2").pairs() == ((0, 1.5), (1, 2.0))

    def test_same_bit_merges(self):
        assert parse_word("0^2 0^3 1^1").pairs() == ((0, 5.0), (1, 1.0))

    def test_zero_exponent_dropped(self):
        assert parse_word("0^0 1^2").pairs() == ((1, 2.0),)

    def test_empty_is_empty_word(self):
        assert parse_word("").pairs() == ()

    def test_braces_commas_negatives(self):
        w = parse_word("0^{-1.5}, 1^2.5")
        assert w.pairs() == ((0, -1.5), (1, 2.5))

    def test_syntax_error(self):
        with pytest.raises(ValueError, match="syntax"):
            parse_word("0^x")
        with pytest.raises(ValueError, match="syntax"):
            parse_word("2")

    def test_cancelling_segments_collapse(self):
        assert parse_word("0^2 1^3 1^-3 0^-2").pairs() == ()
        assert parse_word("0^1 0^-1").pairs() == ()

    def test_str_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            w = random_word(rng, allow_negative=True)
            assert parse_word(str(w)) == w


class TestSteps:
    def test_step0_square(self):
        assert step0(0.5, 1) == pytest.approx(0.25, abs=1e-15)

    def test_step0_inverse(self):
        assert step0(0.25, -1) == pytest.approx(0.5, abs=1e-15)

    def test_step0_identity_exact(self):
        for x in [0.0, 0.123456, 0.5, 0.987, 1.0]:
            assert step0(x, 0) == x

    def test_step0_endpoints(self):
        assert step0(0.0, 3.7) == 0.0
        assert step0(1.0, -2.2) == 1.0

    def test_step1_values(self):
        assert step1(0.5, 1) == pytest.approx(0.75, abs=1e-15)
        assert step1(0.75, -1) == pytest.approx(0.5, abs=1e-15)
        assert step1(0.0, 2.4) == 0.0
        assert step1(1.0, 2.4) == 1.0

    def test_domain_check(self):
        with pytest.raises(ValueError):
            step0(1.5, 1)
        with pytest.raises(ValueError):
            step1(-0.1, 1)


class TestEval:
    def test_examples(self):
        assert eval_word(parse_word("01"), 0.5) == pytest.approx(7 / 16, abs=1e-15)
        assert eval_word(parse_word("10"), 0.5) == pytest.approx(9 / 16, abs=1e-15)

    def test_empty_word_is_identity(self):
        assert eval_word(PolarWord(), 0.3) == 0.3

    def test_inverse_composition_exact(self):
        # 0^m 1^M then its inverse 1^-M 0^-m collapses canonically to the
        # empty word, so the round trip is the identity map exactly
        for m, M in [(1.0, 2.0), (0.7, 1.47), (2.2, 3.9)]:
            w = PolarWord.from_pairs([(0, m), (1, M), (1, -M), (0, -m)])
            assert w.pairs() == ()
            for x in [0.1, 0.5, 0.9]:
                assert eval_word(w, x) == x

    def test_array_matches_scalar(self):
        rng = np.random.default_rng(5)
        xs = rng.uniform(0.01, 0.99, 40)
        for _ in range(20):
            w = random_word(rng, allow_negative=True)
            arr = eval_word_array(w, xs)
            sca = np.array([eval_word(w, float(x)) for x in xs])
            np.testing.assert_allclose(arr, sca, rtol=0, atol=1e-15)


class TestEvalExact:
    def test_simple(self):
        assert eval_word_exact(parse_word("01"), Fraction(1, 2)) == Fraction(7, 16)

    def test_frozen_value_01011(self):
        v = eval_word_exact(parse_word("01011"), Fraction(1, 2))
        assert v == EXACT_01011
        assert v.denominator == 2 ** 32

    def test_empty_identity(self):
        assert eval_word_exact(PolarWord(), Fraction(1, 3)) == Fraction(1, 3)

    def test_agrees_with_float(self):
        v = eval_word_exact(parse_word("01011"), Fraction(1, 2))
        f = eval_word(parse_word("01011"), 0.5)
        assert abs(float(v) - f) <= 1e-12

    def test_rejects_non_integer(self):
        with pytest.raises(ValueError, match="integer"):
            eval_word_exact(parse_word("0^1.5"), Fraction(1, 2))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="root"):
            eval_word_exact(parse_word("0^2 1^-1"), Fraction(1, 2))

    def test_mass_cap(self):
        with pytest.raises(ValueError, match="cap"):
            eval_word_exact(parse_word("0^20 1^20"), Fraction(1, 2))
        # the cap is adjustable; a pure 0-run stays cheap even above 24
        v = eval_word_exact(parse_word("0^25"), Fraction(1, 2), mass_cap=25)
        assert v == Fraction(1, 2 ** (2 ** 25))


class TestComplement:
    def test_bits(self):
        assert complement(parse_word("011")) == parse_word("100")

    def test_exponents_kept(self):
        assert complement(parse_word("0^1.5 1^2")) == parse_word("1^1.5 0^2")

    def test_empty(self):
        assert complement(PolarWord()) == PolarWord()


class TestCompare:
    def test_toy_swap_holds(self):
        v = compare_words(parse_word("10"), parse_word("01"))
        assert v.holds and v.min_gap >= -1e-12

    def test_intro_example_holds(self):
        v = compare_words(parse_word("011"), parse_word("100"))
        assert v.holds

    def test_reverse_fails_with_witness(self):
        v = compare_words(parse_word("01"), parse_word("10"))
        assert not v.holds
        assert v.min_gap == pytest.approx(-0.125, abs=1e-10)
        assert 0.0 < v.witness < 1.0
        assert abs(v.witness - 0.5) < 1e-6

    def test_negative_exponent_warns(self):
        w = PolarWord.from_pairs([(0, 1.0), (1, -0.5)])
        with pytest.warns(UserWarning, match="positive-exponent"):
            v = compare_words(w, parse_word("0"))
        assert "positive-exponent" in v.note

    def test_json_shape(self):
        import json

        v = compare_words(parse_word("011"), parse_word("100"))
        d = json.loads(v.to_json())
        assert set(d) == {"relation", "min_gap", "witness", "samples_used", "note"}
        assert d["relation"] == "holds"
        assert d["samples_used"] == 4097


class TestProperties:
    def test_endpoint_fixing_exact(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            w = random_word(rng, allow_negative=True)
            assert eval_word(w, 0.0) == 0.0
            assert eval_word(w, 1.0) == 1.0

    def test_strict_monotonicity(self):
        # word mass kept moderate so neither tail underflows double precision
        rng = np.random.default_rng(23)
        for _ in range(40):
            w = random_word(rng, max_segments=3, hi=1.2)
            xs = np.sort(rng.uniform(0.1, 0.9, 8))
            vals = [eval_word(w, float(x)) for x in xs]
            assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_self_duality(self):
        rng = np.random.default_rng(31)
        for _ in range(60):
            w = random_word(rng, allow_negative=True)
            x = float(rng.uniform(0.02, 0.98))
            lhs = eval_word(complement(w), x)
            rhs = 1.0 - eval_word(w, 1.0 - x)
            assert abs(lhs - rhs) <= 1e-12

    def test_semigroup(self):
        rng = np.random.default_rng(37)
        for _ in range(60):
            x = float(rng.uniform(0.02, 0.98))
            p, r = rng.uniform(-1.5, 1.5, 2)
            assert step0(step0(x, p), r) == pytest.approx(step0(x, p + r), abs=1e-12)

    def test_sandwich(self):
        rng = np.random.default_rng(41)
        for _ in range(60):
            x = float(rng.uniform(0.02, 0.98))
            p, q = rng.uniform(0.05, 2.0, 2)
            assert step0(x, p) < x < step1(x, q)

    def test_exact_float_agreement(self):
        rng = np.random.default_rng(43)
        for _ in range(30):
            bits = "".join(str(rng.integers(0, 2)) for _ in range(rng.integers(2, 11)))
            w = parse_word(bits)
            x = Fraction(int(rng.integers(1, 64)), 64)
            exact = eval_word_exact(w, x)
            approx = eval_word(w, float(x))
            assert abs(float(exact) - approx) <= 1e-12
