"""Catalog of approximation-rate functions psi: N -> (0,1] and their
diagnostics: orders at infinity, denominator-set restricted orders, the
theta_s companion function, and the two series whose convergence governs
the measure and dimension dichotomies.

The catalog is closed: power, two-adic, power-log, constant, and user
tables.  Wherever a family knows its own exponent (-log psi(q) / log q as
an exact rational) the scans below stay exact; everything else falls back
to floats or bracketed high-precision arithmetic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
from mpmath import mp

from .exact import (
    DomainError,
    _fraction_from_raw,
    format_rational,
    parse_rational,
    pow_bracket,
    pow_cmp,
    rational_pow,
)
from . import limsup as _limsup


def nu2(q: int) -> int:
    """2-adic valuation: the largest k with 2^k dividing q."""
    q = int(q)
    if q < 1:
        raise DomainError(f"nu2 needs q >= 1, got {q}")
    return (q & -q).bit_length() - 1


FAMILIES = ("power", "two-adic", "power-log", "constant", "table")


@dataclass(frozen=True)
class PsiSpec:
    """Declarative rate function from the closed catalog.

    power:     psi(q) = q^-tau,                      tau >= 0
    two-adic:  psi(q) = q^-(tau + nu2(q)),           tau >= 0
    power-log: psi(q) = min(1, q^-tau (log(q+1))^-beta)
    constant:  psi(q) = c,                           c in (0, 1]
    table:     explicit rational values from a CSV file

    Values always lie in (0, 1]; construction enforces the parameter
    ranges that guarantee it.
    """

    family: str
    tau: Optional[Fraction] = None
    beta: Optional[Fraction] = None
    c: Optional[Fraction] = None
    table: Optional[Tuple[Tuple[int, Fraction], ...]] = None
    table_path: Optional[str] = None
    _lookup: Optional[Dict[int, Fraction]] = field(
        default=None, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.family in ("power", "two-adic"):
            if self.tau is None or self.tau < 0:
                raise DomainError("tau >= 0 required")
        elif self.family == "power-log":
            if self.tau is None or self.tau < 0 or self.beta is None:
                raise DomainError("power-log needs tau >= 0 and beta")
        elif self.family == "constant":
            if self.c is None or not (0 < self.c <= 1):
                raise DomainError("constant c must lie in (0, 1]")
        elif self.family == "table":
            if not self.table:
                raise DomainError("table family needs entries")
            for q, v in self.table:
                if q < 1 or not (0 < v <= 1):
                    raise DomainError(f"table entry ({q}, {v}) outside domain")
            object.__setattr__(self, "_lookup", dict(self.table))

    # -- text grammar ----------------------------------------------------

    def __str__(self) -> str:
        if self.family == "power":
            return f"power:tau={format_rational(self.tau)}"
        if self.family == "two-adic":
            return f"two-adic:tau={format_rational(self.tau)}"
        if self.family == "power-log":
            return f"power-log:tau={format_rational(self.tau)},beta={format_rational(self.beta)}"
        if self.family == "constant":
            return f"const:c={format_rational(self.c)}"
        return f"table:{self.table_path or '<inline>'}"

    @classmethod
    def parse(cls, text: str) -> "PsiSpec":
        text = text.strip()
        if ":" not in text:
            raise DomainError(f"rate spec needs 'family:params', got {text!r}")
        family, params = text.split(":", 1)
        family = family.strip()
        if family == "table":
            return cls.from_table_file(params.strip())
        kv = {}
        for piece in params.split(","):
            if "=" not in piece:
                raise DomainError(f"bad parameter {piece!r} in {text!r}")
            key, val = piece.split("=", 1)
            kv[key.strip()] = parse_rational(val)
        try:
            if family == "power":
                spec = cls(family="power", tau=kv.pop("tau"))
            elif family == "two-adic":
                spec = cls(family="two-adic", tau=kv.pop("tau"))
            elif family == "power-log":
                spec = cls(family="power-log", tau=kv.pop("tau"), beta=kv.pop("beta"))
            elif family == "const":
                spec = cls(family="constant", c=kv.pop("c"))
            else:
                raise DomainError(f"unknown family {family!r}")
        except KeyError as exc:
            raise DomainError(f"missing parameter {exc} in {text!r}") from exc
        if kv:
            raise DomainError(f"unknown parameters {sorted(kv)} in {text!r}")
        return spec

    @classmethod
    def from_table_file(cls, path: str) -> "PsiSpec":
        rows = []
        try:
            with open(path, newline="") as fh:
                for rec in csv.reader(fh):
                    if not rec or rec[0].strip().lower() == "q":
                        continue
                    rows.append((int(rec[0]), parse_rational(rec[1])))
        except OSError as exc:
            raise DomainError(f"cannot read table {path!r}: {exc}") from exc
        return cls(family="table", table=tuple(rows), table_path=str(Path(path)))

    # -- evaluation ------------------------------------------------------

    def exact_exponent(self, q: int) -> Optional[Fraction]:
        """-log psi(q) / log q as an exact rational, when the family knows it."""
        if self.family == "power":
            return self.tau
        if self.family == "two-adic":
            return self.tau + nu2(q)
        if self.family == "constant":
            return Fraction(0) if self.c == 1 else None
        if self.family == "table":
            v = self._table_value(q)
            if v == 1:
                return Fraction(0)
            ratio = 1 / v
            if ratio.denominator == 1 and q >= 2:
                n = ratio.numerator
                k = round(math.log(n) / math.log(q))
                for cand in (k - 1, k, k + 1):
                    if cand >= 0 and q**cand == n:
                        return Fraction(cand)
            return None
        return None

    def _table_value(self, q: int) -> Fraction:
        v = self._lookup.get(int(q))
        if v is None:
            raise DomainError(f"table has no entry for q={q}")
        return v

    def eval(self, q: int) -> Union[Fraction, mpmath.mpf]:
        """psi(q); exact Fraction whenever the value is rational."""
        q = int(q)
        if q < 1:
            raise DomainError(f"q must be >= 1, got {q}")
        if self.family == "constant":
            return self.c
        if self.family == "table":
            return self._table_value(q)
        if self.family in ("power", "two-adic"):
            e = self.exact_exponent(q)
            exact = rational_pow(Fraction(q), -e)
            if exact is not None:
                return exact
            return mp.power(q, -mp.mpf(e.numerator) / e.denominator)
        # power-log, clamped into (0, 1]
        val = mp.power(q, -mp.mpf(self.tau.numerator) / self.tau.denominator) * mp.power(
            mp.log(q + 1), -mp.mpf(self.beta.numerator) / self.beta.denominator
        )
        return mpmath.mpf(1) if val >= 1 else val

    def log_psi(self, q: int) -> float:
        """Natural log of psi(q) as a float; safe against underflow."""
        e = self.exact_exponent(q)
        if e is not None:
            return -float(e) * math.log(q)
        if self.family == "constant":
            return math.log(self.c.numerator) - math.log(self.c.denominator)
        if self.family == "table":
            v = self._table_value(q)
            return math.log(v.numerator) - math.log(v.denominator)
        if self.family == "power":
            return -float(self.tau) * math.log(q)
        # power-log
        raw = -float(self.tau) * math.log(q) - float(self.beta) * math.log(math.log(q + 1))
        return min(0.0, raw)

    def cmp_values(self, q1: int, q2: int) -> int:
        """Exact sign of psi(q1) - psi(q2) where the catalog permits it."""
        if self.family == "constant":
            return 0
        if self.family == "table":
            a, b = self._table_value(q1), self._table_value(q2)
            return (a > b) - (a < b)
        if self.family in ("power", "two-adic"):
            e1, e2 = self.exact_exponent(q1), self.exact_exponent(q2)
            # psi(q1) > psi(q2)  iff  q2^e2 > q1^e1; clear denominators
            lcm = e1.denominator * e2.denominator // math.gcd(e1.denominator, e2.denominator)
            lhs = q2 ** int(e2 * lcm)
            rhs = q1 ** int(e1 * lcm)
            return (lhs > rhs) - (lhs < rhs)
        a, b = float(self.log_psi(q1)), float(self.log_psi(q2))
        if a == b:
            return 0
        return 1 if a > b else -1

    def psi_over_q_bracket(self, q: int, dps: int = 30) -> Tuple[Fraction, Fraction]:
        """Certified rational bracket lo <= psi(q)/q <= hi; degenerate when
        the value is rational."""
        q = int(q)
        if self.family == "constant":
            return self.c / q, self.c / q
        if self.family == "table":
            v = self._table_value(q)
            return v / q, v / q
        if self.family in ("power", "two-adic"):
            e = self.exact_exponent(q)
            return pow_bracket(Fraction(q), -(e + 1), dps)
        # power-log
        iv = mpmath.iv
        old = iv.dps
        try:
            iv.dps = dps
            tau = iv.mpf(self.tau.numerator) / self.tau.denominator
            beta = iv.mpf(self.beta.numerator) / self.beta.denominator
            raw = iv.exp(-tau * iv.log(q)) * iv.exp(-beta * iv.log(iv.log(q + 1)))
            raw_lo, raw_hi = raw._mpi_
            lo, hi = _fraction_from_raw(raw_lo), _fraction_from_raw(raw_hi)
        finally:
            iv.dps = old
        lo, hi = min(lo, Fraction(1)), min(hi, Fraction(1))  # the min(1, .) clamp
        return lo / q, hi / q

    def hit_compare(self, error: Fraction, q: int) -> bool:
        """Exact test of error < psi(q)/q."""
        if error <= 0:
            return False
        e = self.exact_exponent(q)
        if e is not None:
            return pow_cmp(Fraction(q), -(e + 1), error) > 0
        if self.family in ("constant", "table"):
            v = self.eval(q)
            return error < v / Fraction(q)
        for dps in (mp.dps, mp.dps * 2, mp.dps * 4):
            lo, hi = self.psi_over_q_bracket(q, dps)
            if error < lo:
                return True
            if error >= hi:
                return False
        raise DomainError("cannot decide hit comparison at available precision")


def psi_eval(spec: PsiSpec, q: int):
    return spec.eval(q)


def monotonicity_violations(spec: PsiSpec, q_max: int) -> List[int]:
    """All q < q_max with psi(q+1) > psi(q); empty means non-increasing."""
    if q_max < 2:
        raise DomainError("q_max >= 2 required")
    out = []
    for q in range(1, q_max):
        if spec.cmp_values(q + 1, q) > 0:
            out.append(q)
    return out


@dataclass(frozen=True)
class OrderEstimate:
    """Window extremes of -log psi(q)/log q.

    lower/upper are the min/max over the finite scan window, the only
    computable stand-ins for liminf/limsup; q_min/q_max record the window.
    When restricted_k is set the scan ran over the depth-k denominator set
    ordered increasingly.
    """

    lower: Union[Fraction, float]
    upper: Union[Fraction, float]
    q_min: int
    q_max: int
    restricted_k: Optional[int] = None
    exact: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise DomainError("lower > upper")

    @property
    def dim_bracket(self) -> Tuple[float, float]:
        """(1/(1+upper), 1/(1+lower)): the dimension bracket the orders imply."""
        return 1.0 / (1.0 + float(self.upper)), 1.0 / (1.0 + float(self.lower))


def _order_scan(spec: PsiSpec, qs) -> Tuple[Union[Fraction, float], Union[Fraction, float], bool]:
    lo = hi = None
    exact = True
    for q in qs:
        e = spec.exact_exponent(q)
        if e is None:
            exact = False
            lq = math.log(q)
            e = -spec.log_psi(q) / lq if lq > 0 else 0.0
        if lo is None or e < lo:
            lo = e
        if hi is None or e > hi:
            hi = e
    if lo is None:
        raise DomainError("empty scan window")
    return lo, hi, exact


def order_estimate(spec: PsiSpec, q_min: int, q_max: int) -> OrderEstimate:
    """Window min/max of the exponent -log psi(q)/log q over [q_min, q_max]."""
    if not (2 <= q_min < q_max):
        raise DomainError("need 2 <= q_min < q_max")
    lo, hi, exact = _order_scan(spec, range(q_min, q_max + 1))
    return OrderEstimate(lower=lo, upper=hi, q_min=q_min, q_max=q_max, exact=exact)


def lambda_order_estimate(spec: PsiSpec, k: int, Q_max: int) -> OrderEstimate:
    """Same scan restricted to the depth-k denominator set inside [2^k, Q_max].

    Every member is divisible by 2^(k-1), so highly 2-divisible rates show
    their restricted behaviour here.
    """
    if k < 1:
        raise DomainError("k >= 1 required")
    if Q_max < 2**k:
        raise DomainError(f"Q_max={Q_max} < 2^{k}: the depth-{k} denominator set is empty")
    qs = sorted({t.Q for t in _limsup.enumerate_S_k(k, Q_max)})
    lo, hi, exact = _order_scan(spec, qs)
    return OrderEstimate(
        lower=lo, upper=hi, q_min=2**k, q_max=Q_max, restricted_k=k, exact=exact
    )


@dataclass(frozen=True)
class ThetaFunction:
    """theta_s(q) = q^(1-s) psi(q)^s, the auxiliary rate used to pull the
    measure dichotomy into the dimension bound."""

    spec: PsiSpec
    s: Fraction

    def eval(self, q: int) -> Union[Fraction, mpmath.mpf]:
        q = int(q)
        if q < 1:
            raise DomainError("q >= 1 required")
        e = self.spec.exact_exponent(q)
        if e is not None:
            exponent = (1 - self.s) - e * self.s
            exact = rational_pow(Fraction(q), exponent)
            if exact is not None:
                return exact
            return mp.power(q, mp.mpf(exponent.numerator) / exponent.denominator)
        v = self.spec.eval(q)
        if isinstance(v, Fraction):
            qs = rational_pow(Fraction(q), 1 - self.s)
            vs = rational_pow(v, self.s)
            if qs is not None and vs is not None:
                return qs * vs
            v = mp.mpf(v.numerator) / v.denominator
        sf = mp.mpf(self.s.numerator) / self.s.denominator
        return mp.power(q, 1 - sf) * mp.power(v, sf)

    def log_value(self, q: int) -> float:
        e = self.spec.exact_exponent(q)
        if e is not None:
            return float((1 - self.s) - e * self.s) * math.log(q)
        return float(1 - self.s) * math.log(q) + float(self.s) * self.spec.log_psi(q)


def theta(spec: PsiSpec, s) -> ThetaFunction:
    """Evaluable theta_s; for power(tau) at s = 1/(1+tau) it is identically 1.

    s = 1 is admitted so the critical exponent of tau = 0 stays in range;
    there theta_1 = psi.
    """
    s = Fraction(s) if not isinstance(s, Fraction) else s
    if not (0 < s <= 1):
        raise DomainError("s must lie in (0, 1]")
    return ThetaFunction(spec=spec, s=s)


@dataclass(frozen=True)
class SeriesReport:
    """Partial sums at checkpoints with a trend verdict.

    The verdict is a tail-slope heuristic in log Q; analytic_verdict is
    only filled for catalog families whose convergence is known by a
    comparison test, and is the thing acceptance checks trust.
    """

    kind: str
    partial_sums: Tuple[Tuple[int, float], ...]
    verdict: str
    analytic_verdict: Optional[str] = None
    s: Optional[Fraction] = None


def _trend_verdict(partial: Sequence[Tuple[int, float]]) -> str:
    if not partial:
        return "inconclusive"
    if partial[-1][1] == 0.0:
        return "converging-trend"
    if len(partial) < 3:
        return "inconclusive"
    slopes = []
    for (q0, s0), (q1, s1) in zip(partial, partial[1:]):
        dlog = math.log(q1) - math.log(q0)
        if dlog > 0:
            slopes.append((s1 - s0) / dlog)
    if not slopes:
        return "inconclusive"
    ref = max(slopes)
    last = slopes[-1]
    tiny = 1e-12 * max(1.0, abs(partial[-1][1]))
    if last <= tiny or (ref > 0 and last < 0.1 * ref):
        return "converging-trend"
    if ref > tiny and last >= 0.5 * ref:
        return "diverging-trend"
    return "inconclusive"


def _khintchine_analytic(spec: PsiSpec) -> Optional[str]:
    if spec.family == "power":
        return "converges"  # tau>0 by log q/q^(1+tau) comparison; tau=0 sums zero
    if spec.family == "two-adic":
        return "converges"  # odd q: power decay or zero terms; even q gains q^-nu2
    if spec.family == "constant":
        return "converges" if spec.c == 1 else "diverges"  # -c log c * harmonic
    if spec.family == "power-log":
        if spec.tau > 0 or spec.beta <= 0:
            return "converges"
        return "diverges" if spec.beta <= 1 else "converges"  # Bertrand scale
    return None


def _dodson_analytic(spec: PsiSpec, s: Fraction) -> Optional[str]:
    if spec.family == "power":
        return "diverges" if (1 + spec.tau) * s <= 1 else "converges"
    if spec.family == "two-adic":
        return "diverges" if (1 + spec.tau) * s <= 1 else "converges"  # odd q decide
    if spec.family == "constant":
        return "diverges"  # terms ~ log q / q^s with s <= 1
    if spec.family == "power-log":
        e = (1 + spec.tau) * s
        if e < 1:
            return "diverges"
        if e == 1:
            return "diverges" if spec.beta * s <= 2 else "converges"
        return "converges"
    return None


def _series_partials(term_log, checkpoints: Sequence[int]) -> Tuple[Tuple[int, float], ...]:
    cps = sorted(set(int(c) for c in checkpoints))
    if not cps or cps[0] < 1:
        raise DomainError("checkpoints must be positive")
    out = []
    total = 0.0
    prev = 0
    for cp in cps:
        chunk = []
        for q in range(prev + 1, cp + 1):
            chunk.append(term_log(q))
        total += math.fsum(chunk)
        out.append((cp, total))
        prev = cp
    return tuple(out)


def khintchine_series(spec: PsiSpec, checkpoints: Sequence[int]) -> SeriesReport:
    """Partial sums of -psi(q) log psi(q) / q.

    Terms are non-negative since psi <= 1, so the sums are non-decreasing;
    psi identically 1 gives the all-zero boundary series.
    """

    def term(q: int) -> float:
        L = spec.log_psi(q)
        return -math.exp(L) * L / q if L < 0 else 0.0

    partial = _series_partials(term, checkpoints)
    return SeriesReport(
        kind="khintchine",
        partial_sums=partial,
        verdict=_trend_verdict(partial),
        analytic_verdict=_khintchine_analytic(spec),
    )


def dodson_series(spec: PsiSpec, s, checkpoints: Sequence[int]) -> SeriesReport:
    """Partial sums of (psi(q)/q)^s log q for 0 < s <= 1."""
    s = Fraction(s) if not isinstance(s, Fraction) else s
    if not (0 < s <= 1):
        raise DomainError("s must lie in (0, 1]")

    def term(q: int) -> float:
        if q == 1:
            return 0.0
        lq = math.log(q)
        return math.exp(float(s) * (spec.log_psi(q) - lq)) * lq

    partial = _series_partials(term, checkpoints)
    return SeriesReport(
        kind="dodson",
        partial_sums=partial,
        verdict=_trend_verdict(partial),
        analytic_verdict=_dodson_analytic(spec, s),
        s=s,
    )
