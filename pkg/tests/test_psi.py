import math
from fractions import Fraction

import pytest

from luroth.exact import DomainError
from luroth.psi import (
    OrderEstimate,
    PsiSpec,
    dodson_series,
    khintchine_series,
    lambda_order_estimate,
    monotonicity_violations,
    nu2,
    order_estimate,
    psi_eval,
    theta,
)

F = Fraction


def power(tau):
    return PsiSpec(family="power", tau=F(tau))


def two_adic(tau):
    return PsiSpec(family="two-adic", tau=F(tau))


def const(c):
    return PsiSpec(family="constant", c=F(c))


class TestNu2:
    @pytest.mark.parametrize("q,expected", [(8, 3), (12, 2), (7, 0), (1, 0), (96, 5)])
    def test_values(self, q, expected):
        assert nu2(q) == expected

    def test_rejects_zero(self):
        with pytest.raises(DomainError):
            nu2(0)

    def test_oracle(self):
        for q in range(1, 2000):
            k = 0
            m = q
            while m % 2 == 0:
                m //= 2
                k += 1
            assert nu2(q) == k


class TestEval:
    def test_two_adic_tau0_at_8(self):
        assert psi_eval(two_adic(0), 8) == F(1, 512)

    def test_two_adic_odd(self):
        spec = two_adic(F(3, 2))
        for q in (3, 5, 7, 9, 101):
            assert spec.exact_exponent(q) == F(3, 2)

    def test_power_tau1_at_24(self):
        assert psi_eval(power(1), 24) == F(1, 24)

    def test_domain_invariant(self):
        specs = [power(0), power(2), two_adic(0), two_adic(1), const(F(1, 3)),
                 PsiSpec(family="power-log", tau=F(1), beta=F(2))]
        for spec in specs:
            for q in (1, 2, 3, 8, 100, 1023, 1024):
                v = spec.eval(q)
                assert 0 < v <= 1, (spec, q, v)

    def test_table(self):
        spec = PsiSpec(family="table", table=((10, F(1, 100)), (20, F(1, 3))))
        assert spec.eval(10) == F(1, 100)
        with pytest.raises(DomainError):
            spec.eval(11)

    def test_power_log_clamps_to_one(self):
        spec = PsiSpec(family="power-log", tau=F(0), beta=F(1, 2))
        assert spec.eval(1) == 1  # log(2) < 1 makes the raw value exceed 1

    def test_constructor_rejects(self):
        with pytest.raises(DomainError):
            PsiSpec(family="power", tau=F(-1))
        with pytest.raises(DomainError):
            PsiSpec(family="constant", c=F(2))
        with pytest.raises(DomainError):
            PsiSpec(family="nope")

    def test_two_adic_divisibility_inequality(self):
        # 2^k | q forces psi(q) <= q^-(tau+k), exactly
        for tau in (F(0), F(1), F(1, 2)):
            spec = two_adic(tau)
            for q in range(1, 300):
                for k in range(0, 9):
                    if q % (1 << k) == 0:
                        e = spec.exact_exponent(q)
                        assert e >= tau + k


class TestGrammar:
    @pytest.mark.parametrize(
        "text",
        ["power:tau=3", "two-adic:tau=1/2", "power-log:tau=1,beta=2", "const:c=1/2"],
    )
    def test_round_trip(self, text):
        spec = PsiSpec.parse(text)
        assert PsiSpec.parse(str(spec)) == spec

    def test_decimal_params_exact(self):
        assert PsiSpec.parse("power:tau=0.5").tau == F(1, 2)

    def test_table_file(self, tmp_path):
        p = tmp_path / "tab.csv"
        p.write_text("q,psi\n10,1/100\n20,1/3\n")
        spec = PsiSpec.parse(f"table:{p}")
        assert spec.eval(10) == F(1, 100)

    def test_rejects_junk(self):
        for bad in ["power", "power:tau=-1", "gauss:tau=1", "const:c=0",
                    "power:tau=1,extra=2", "power-log:tau=1", "power:beta=1"]:
            with pytest.raises(DomainError):
                PsiSpec.parse(bad)


class TestMonotonicity:
    def test_two_adic_tau1_finds_4(self):
        viol = monotonicity_violations(two_adic(1), 20)
        assert 4 in viol  # psi(5)=1/5 > psi(4)=1/64

    def test_power_monotone(self):
        assert monotonicity_violations(power(2), 200) == []

    def test_two_adic_powers_of_two(self):
        # every q = 2^n with n beyond tau + sqrt(tau) must appear
        spec = two_adic(1)
        viol = set(monotonicity_violations(spec, 2**12 + 2))
        for n in range(3, 13):
            assert 2**n in viol

    def test_oracle_small_window(self):
        spec = two_adic(F(1, 2))
        viol = set(monotonicity_violations(spec, 64))
        for q in range(1, 63):
            lhs = -float(spec.exact_exponent(q + 1)) * math.log(q + 1)
            rhs = -float(spec.exact_exponent(q)) * math.log(q)
            if abs(lhs - rhs) > 1e-9:
                assert (lhs > rhs) == (q in viol)


class TestOrderEstimate:
    def test_power_exact(self):
        for tau in (0, 3, F(1, 2)):
            est = order_estimate(power(tau), 2, 500)
            assert est.lower == tau and est.upper == tau
            assert est.exact

    def test_two_adic_lower_attained_at_odd(self):
        est = order_estimate(two_adic(1), 3, 4096)
        assert est.lower == 1
        assert est.upper == 1 + 12  # q = 4096 = 2^12

    def test_two_adic_upper_grows_with_window(self):
        e1 = order_estimate(two_adic(0), 3, 2**10)
        e2 = order_estimate(two_adic(0), 3, 2**14)
        assert e2.upper > e1.upper

    def test_window_validation(self):
        with pytest.raises(DomainError):
            order_estimate(power(1), 5, 5)

    def test_dim_bracket(self):
        est = order_estimate(power(1), 2, 100)
        lo, hi = est.dim_bracket
        assert lo == hi == 0.5


class TestLambdaOrder:
    def test_power_unchanged(self):
        est = lambda_order_estimate(power(F(3, 2)), 2, 100)
        assert est.lower == F(3, 2) and est.upper == F(3, 2)
        assert est.restricted_k == 2

    def test_constant_one_zero(self):
        est = lambda_order_estimate(const(1), 3, 64)
        assert est.lower == 0 and est.upper == 0

    def test_two_adic_k3_floor(self):
        # every depth-3 denominator is divisible by 4, so nu2 >= 2
        est = lambda_order_estimate(two_adic(1), 3, 500)
        assert est.lower >= 3

    def test_empty_window_error(self):
        with pytest.raises(DomainError):
            lambda_order_estimate(power(1), 3, 7)


class TestTheta:
    def test_power_identity(self):
        for tau in (0, 1, 3):
            th = theta(power(tau), F(1, 1 + tau))
            for q in (1, 2, 7, 24, 1000):
                assert th.eval(q) == 1

    def test_table_examples(self):
        spec = PsiSpec(family="table", table=((10, F(1, 100)),))
        assert theta(spec, F(1, 3)).eval(10) == 1
        spec2 = PsiSpec(family="table", table=((10, F(1, 1000)),))
        v = theta(spec2, F(1, 3)).eval(10)
        # 10^(2/3) * 10^(-1) = 10^(-1/3)
        assert abs(float(v) - 10 ** (-1 / 3)) < 1e-12

    def test_s_domain(self):
        with pytest.raises(DomainError):
            theta(power(1), F(3, 2))


class TestKhintchineSeries:
    def test_constant_half_diverging(self):
        rep = khintchine_series(const(F(1, 2)), [10, 100, 1000, 10000])
        assert rep.verdict == "diverging-trend"
        assert rep.analytic_verdict == "diverges"
        # partial sum equals (log 2 / 2) * H_Q exactly in the term formula
        HQ = sum(1.0 / q for q in range(1, 10001))
        assert abs(rep.partial_sums[-1][1] - math.log(2) / 2 * HQ) < 1e-9

    def test_power2_converging(self):
        rep = khintchine_series(power(2), [10, 100, 1000, 10000])
        assert rep.verdict == "converging-trend"
        assert rep.analytic_verdict == "converges"

    def test_psi_one_zero_series(self):
        rep = khintchine_series(power(0), [10, 100, 1000])
        assert rep.partial_sums[-1][1] == 0.0
        assert rep.verdict == "converging-trend"
        assert rep.analytic_verdict == "converges"

    def test_partial_sums_monotone(self):
        for spec in (const(F(1, 2)), power(2), two_adic(1)):
            rep = khintchine_series(spec, [10, 50, 100, 500, 1000])
            vals = [v for _, v in rep.partial_sums]
            assert vals == sorted(vals)

    def test_oracle_direct_sum(self):
        spec = power(2)
        rep = khintchine_series(spec, [200])
        direct = sum(
            -float(spec.eval(q)) * math.log(float(spec.eval(q))) / q
            for q in range(1, 201)
            if spec.eval(q) < 1
        )
        assert abs(rep.partial_sums[0][1] - direct) < 1e-12

    def test_divergence_implication_on_catalog(self):
        # khintchine divergence forces divergence of sum(psi) for
        # non-increasing psi <= 1/2: checked at the analytic-verdict level
        cases = [
            (const(F(1, 2)), True),
            (const(F(1, 4)), True),
            (PsiSpec(family="power-log", tau=F(0), beta=F(1, 2)), True),
        ]
        for spec, sum_psi_diverges in cases:
            rep = khintchine_series(spec, [10, 100])
            if rep.analytic_verdict == "diverges":
                assert sum_psi_diverges


class TestDodsonSeries:
    def test_critical_exponent_harmonic_log(self):
        rep = dodson_series(power(1), F(1, 2), [100, 1000, 10000])
        assert rep.verdict == "diverging-trend"
        assert rep.analytic_verdict == "diverges"
        expected = math.log(10000) ** 2 / 2
        assert abs(rep.partial_sums[-1][1] - expected) / expected < 0.1

    def test_supercritical_converges(self):
        # analytic verdict is the ground truth; the trend heuristic needs a
        # clearly supercritical exponent to see the flattening
        rep = dodson_series(power(1), F(9, 10), [10, 100, 1000, 10000, 100000])
        assert rep.verdict == "converging-trend"
        assert rep.analytic_verdict == "converges"
        borderline = dodson_series(power(1), F(11, 20), [100, 1000, 10000])
        assert borderline.analytic_verdict == "converges"

    def test_constant_s1(self):
        rep = dodson_series(const(1), 1, [100, 1000, 10000])
        assert rep.verdict == "diverging-trend"
        assert rep.analytic_verdict == "diverges"

    def test_s_domain(self):
        with pytest.raises(DomainError):
            dodson_series(power(1), 0, [10])
