import random
from fractions import Fraction

import pytest

from luroth.exact import (
    DomainError,
    format_rational,
    iroot,
    mpf_to_fraction,
    parse_rational,
    pow_bracket,
    pow_cmp,
    rational_pow,
)

F = Fraction


class TestParseRational:
    @pytest.mark.parametrize(
        "text,value",
        [("27/71", F(27, 71)), ("1", F(1)), ("0.5", F(1, 2)), ("1e-3", F(1, 1000)),
         ("-3/4", F(-3, 4))],
    )
    def test_values(self, text, value):
        assert parse_rational(text) == value

    def test_round_trip(self):
        for f in (F(1), F(27, 71), F(-5, 3)):
            assert parse_rational(format_rational(f)) == f

    def test_rejects(self):
        for bad in ("", "a/b", "1/0", "1.2.3"):
            with pytest.raises(DomainError):
                parse_rational(bad)


class TestIroot:
    def test_exact_roots(self):
        assert iroot(27, 3) == (3, True)
        assert iroot(1024, 2) == (32, True)
        assert iroot(1, 7) == (1, True)

    def test_floor_roots(self):
        assert iroot(26, 3) == (2, False)
        assert iroot(10**12 + 1, 2) == (10**6, False)

    def test_huge_inputs_no_float_overflow(self):
        n = 7**401
        r, exact = iroot(n**3, 3)
        assert exact and r == n
        r, exact = iroot(n**3 + 1, 3)
        assert not exact and r == n

    def test_matches_naive_scan(self):
        rng = random.Random(17)
        for _ in range(300):
            n = rng.randrange(0, 5000)
            k = rng.randrange(1, 6)
            r, exact = iroot(n, k)
            assert r**k <= n < (r + 1) ** k
            assert exact == (r**k == n)


class TestRationalPow:
    def test_exact_cases(self):
        assert rational_pow(F(4, 9), F(1, 2)) == F(2, 3)
        assert rational_pow(F(8, 27), F(2, 3)) == F(4, 9)
        assert rational_pow(F(5, 7), F(-2)) == F(49, 25)
        assert rational_pow(F(10), F(0)) == 1

    def test_irrational_returns_none(self):
        assert rational_pow(F(2), F(1, 2)) is None
        assert rational_pow(F(1, 8), F(1, 3)) == F(1, 2)

    def test_rejects_nonpositive_base(self):
        with pytest.raises(DomainError):
            rational_pow(F(0), F(1, 2))


class TestPowCmp:
    def test_known_comparisons(self):
        assert pow_cmp(F(2), F(1, 2), F(3, 2)) < 0   # sqrt2 < 1.5
        assert pow_cmp(F(2), F(1, 2), F(7, 5)) > 0   # sqrt2 > 1.4
        assert pow_cmp(F(8), F(2, 3), F(4)) == 0
        assert pow_cmp(F(4), F(-1, 2), F(1, 2)) == 0

    def test_against_float_oracle(self):
        rng = random.Random(19)
        for _ in range(300):
            base = F(rng.randrange(1, 50), rng.randrange(1, 50))
            exp = F(rng.randrange(-6, 7), rng.randrange(1, 5))
            rhs = F(rng.randrange(1, 50), rng.randrange(1, 50))
            approx = float(base) ** float(exp) - float(rhs)
            got = pow_cmp(base, exp, rhs)
            if abs(approx) > 1e-9:
                assert got == (1 if approx > 0 else -1)


class TestPowBracket:
    def test_exact_degenerate(self):
        lo, hi = pow_bracket(F(1, 4), F(1, 2))
        assert lo == hi == F(1, 2)

    def test_encloses_truth(self):
        lo, hi = pow_bracket(F(1, 8), F(1, 2), dps=30)
        assert lo < hi
        # rigorous one-sided check by exact squaring, no floats involved
        assert lo * lo <= F(1, 8) <= hi * hi
        assert float(hi - lo) < 1e-25

    def test_directed_bounds_survive_at_full_precision(self):
        # endpoints must come from the interval internals, not a re-rounding
        # through the 15-digit default context
        for base, exp in ((F(1, 8), F(1, 2)), (F(2, 3), F(1, 3)), (F(5), F(-2, 5))):
            lo, hi = pow_bracket(base, exp, dps=40)
            assert lo < hi
            p, q = exp.numerator, exp.denominator
            # verify base^p lies between lo^q and hi^q (monotone in q > 0)
            assert lo**q <= base**p <= hi**q
            assert float(hi - lo) < 1e-35

    def test_mpf_to_fraction_round_trip(self):
        import mpmath

        x = mpmath.mpf("0.1") + mpmath.mpf(3) / 7
        f = mpf_to_fraction(x)
        assert mpmath.mpf(f.numerator) / f.denominator == x
