"""Exact Luroth expansions.

Every x in (0,1] has a unique digit sequence (d_n), d_n >= 2, produced by
iterating the piecewise-linear map

    T(x) = floor(1/x) * (floor(1/x + 1) * x - 1),

with d_1(x) = floor(1/x) + 1 and d_n(x) = d_1(T^(n-1)(x)).  The value is
recovered by the series

    x = sum_k 1 / (d_k * prod_{j<k} d_j (d_j - 1)).

The n-th partial sum is the convergent P_n/Q_n kept deliberately
unsimplified: Q_n = d_1(d_1-1) ... d_{n-1}(d_{n-1}-1) d_n.  All arithmetic
in this module is exact rational arithmetic; floats are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence, Tuple

from .exact import DomainError, format_rational

DEFAULT_PERIOD_CAP = 10_000


def _check_domain(x) -> Fraction:
    if isinstance(x, float):
        raise DomainError("floats are not accepted; pass an exact Fraction")
    x = Fraction(x)
    if not (0 < x <= 1):
        raise DomainError(f"x must lie in (0, 1], got {x}")
    return x


def _check_digits(digit_list: Sequence[int]) -> Tuple[int, ...]:
    digs = tuple(int(d) for d in digit_list)
    if not digs:
        raise DomainError("digit list must be non-empty")
    for d in digs:
        if d < 2:
            raise DomainError(f"digits must be >= 2, got {d}")
    return digs


@dataclass(frozen=True)
class DigitSeq:
    """A finite digit prefix with an optional eventually-periodic tail.

    With a period the sequence denotes a unique rational in (0,1]; without
    one it only names a cylinder.  Text form is ``[d1,d2,...;p1,p2,...]``
    with the part after ``;`` omitted when there is no period.
    """

    prefix: Tuple[int, ...]
    period: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(d) for d in self.prefix))
        for d in self.prefix:
            if d < 2:
                raise DomainError(f"digits must be >= 2, got {d}")
        if self.period is not None:
            per = tuple(int(d) for d in self.period)
            if not per:
                raise DomainError("period, when present, must be non-empty")
            for d in per:
                if d < 2:
                    raise DomainError(f"digits must be >= 2, got {d}")
            object.__setattr__(self, "period", per)

    def __str__(self) -> str:
        head = ",".join(str(d) for d in self.prefix)
        if self.period is None:
            return f"[{head}]"
        tail = ",".join(str(d) for d in self.period)
        return f"[{head};{tail}]" if head else f"[;{tail}]"

    @classmethod
    def parse(cls, text: str) -> "DigitSeq":
        text = text.strip()
        if not (text.startswith("[") and text.endswith("]")):
            raise DomainError(f"digit sequence must look like [d1,d2,...;p1,...]: {text!r}")
        body = text[1:-1]
        if ";" in body:
            head, tail = body.split(";", 1)
            try:
                period = tuple(int(t) for t in tail.split(",") if t.strip())
            except ValueError as exc:
                raise DomainError(f"bad period in {text!r}") from exc
            if not period:
                raise DomainError("empty period after ';'")
        else:
            head, period = body, None
        try:
            prefix = tuple(int(t) for t in head.split(",") if t.strip())
        except ValueError as exc:
            raise DomainError(f"bad digits in {text!r}") from exc
        if not prefix and period is None:
            raise DomainError("empty digit sequence")
        return cls(prefix=prefix, period=period)


@dataclass(frozen=True)
class ConvergentTriple:
    """Unsimplified convergent data (P, Q, last digit, depth) plus the digits.

    Q carries the factor 2^(depth-1) because every d(d-1) is even, and
    P/Q is not reduced: gcd(P, Q) > 1 happens routinely.
    """

    P: int
    Q: int
    d_last: int
    depth: int
    digits: Tuple[int, ...] = field(default=())

    @property
    def value(self) -> Fraction:
        return Fraction(self.P, self.Q)

    @property
    def cylinder_length(self) -> Fraction:
        return Fraction(1, (self.d_last - 1) * self.Q)

    def csv_row(self) -> str:
        digs = "|".join(str(d) for d in self.digits)
        return f"{self.P},{self.Q},{self.d_last},{self.depth},{digs}"


# The enumerated triple set uses the same record shape.
STriple = ConvergentTriple


@dataclass(frozen=True)
class Cylinder:
    """The set of points sharing a digit prefix: the half-open interval
    (left, left + length] with length 1/((d_n - 1) Q_n)."""

    digits: Tuple[int, ...]
    left: Fraction
    length: Fraction

    @property
    def right(self) -> Fraction:
        return self.left + self.length

    def contains(self, x: Fraction) -> bool:
        return self.left < x <= self.right


def luroth_map(x) -> Fraction:
    """One step of the digit-producing map; exact on rationals."""
    x = _check_domain(x)
    k = x.denominator // x.numerator  # floor(1/x)
    return k * ((k + 1) * x - 1)


def first_digit(x) -> int:
    """floor(1/x) + 1, the branch index containing x."""
    x = _check_domain(x)
    return x.denominator // x.numerator + 1


def digit_prefix(x, n: int) -> Tuple[int, ...]:
    """First n digits with no period search; the fast path for bulk scans."""
    x = _check_domain(x)
    if n < 1:
        raise DomainError("need n >= 1")
    out = []
    y = x
    for _ in range(n):
        out.append(first_digit(y))
        y = luroth_map(y)
    return tuple(out)


def digits(x, n: int, period_cap: int = DEFAULT_PERIOD_CAP) -> DigitSeq:
    """First n digits of x, plus the periodic tail when the orbit cycles.

    Rational orbits always cycle (the map preserves the denominator), so
    the scan memoizes exact orbit points until it sees a repeat, up to
    period_cap iterations; past the cap the prefix is returned with no
    period rather than a guess.  The reported period is phase-aligned with
    the end of the prefix, so evaluate() on the result reproduces x.
    """
    x = _check_domain(x)
    if n < 1:
        raise DomainError("need n >= 1")
    out: list[int] = []
    seen = {x: 0}
    y = x
    period: Optional[Tuple[int, ...]] = None
    cycle_start = 0
    i = 0
    while True:
        out.append(first_digit(y))
        y = luroth_map(y)
        i += 1
        if y in seen:
            cycle_start = seen[y]
            period = tuple(out[cycle_start:i])
            break
        if i >= period_cap:
            break
        seen[y] = i
    if period is None:
        while len(out) < n:
            out.append(first_digit(y))
            y = luroth_map(y)
    else:
        while len(out) < n:
            out.append(period[(len(out) - cycle_start) % len(period)])
    prefix = tuple(out[:n])
    if period is not None and n >= cycle_start:
        shift = (n - cycle_start) % len(period)
        period = period[shift:] + period[:shift]
    else:
        # The tail right after position n is still pre-periodic; attaching
        # the cycle here would evaluate to the wrong point.
        period = None
    return DigitSeq(prefix=prefix, period=period)


def convergent(digit_list: Sequence[int]) -> ConvergentTriple:
    """The unsimplified (P, Q) of a digit tuple: Q by the product formula,
    P = (partial sum) * Q, always an exact integer."""
    digs = _check_digits(digit_list)
    Q = 1
    for d in digs[:-1]:
        Q *= d * (d - 1)
    Q *= digs[-1]
    total = Fraction(0)
    block = 1
    for d in digs:
        total += Fraction(1, block * d)
        block *= d * (d - 1)
    P = total * Q
    assert P.denominator == 1
    return ConvergentTriple(P=int(P), Q=Q, d_last=digs[-1], depth=len(digs), digits=digs)


def evaluate(seq: DigitSeq) -> Fraction:
    """Exact value of an eventually periodic digit sequence.

    The periodic tail satisfies y = s + y/B for the one-period partial sum
    s and block product B = prod p(p-1), so y = s*B/(B-1) in closed form.
    """
    if seq.period is None:
        raise DomainError("a finite prefix names a cylinder, not a point; period required")
    total = Fraction(0)
    block = 1
    for d in seq.prefix:
        total += Fraction(1, block * d)
        block *= d * (d - 1)
    per_sum = Fraction(0)
    per_block = 1
    for d in seq.period:
        per_sum += Fraction(1, per_block * d)
        per_block *= d * (d - 1)
    tail = per_sum * Fraction(per_block, per_block - 1)
    return total + tail / block


def cylinder(digit_list: Sequence[int]) -> Cylinder:
    """Cylinder of a digit prefix: left endpoint is the convergent value,
    length is 1/((d_n - 1) Q_n)."""
    t = convergent(digit_list)
    return Cylinder(digits=t.digits, left=t.value, length=t.cylinder_length)


def approximation_error(x, n: int) -> Fraction:
    """x - P_n/Q_n, exact and always in (0, 1/((d_n - 1) Q_n)]."""
    x = _check_domain(x)
    t = convergent(digit_prefix(x, n))
    err = x - t.value
    assert 0 < err <= t.cylinder_length
    return err


@dataclass(frozen=True)
class DigitBoundsReport:
    """|x Q_n - P_n| against the two-sided digit-product bounds.

    The weak chain loose_lower <= value <= loose_upper holds always;
    strictness of the tight upper bound fails exactly on all-2 tails,
    which realize the equality case.
    """

    value: Fraction
    lower: Fraction
    upper: Fraction
    loose_lower: Fraction
    loose_upper: Fraction
    d_n: int
    d_next: int
    all2_tail: bool

    @property
    def strict_lower_ok(self) -> bool:
        return self.lower < self.value

    @property
    def strict_upper_ok(self) -> bool:
        return self.value < self.upper

    @property
    def weak_chain_ok(self) -> bool:
        return self.loose_lower <= self.value <= self.loose_upper

    @property
    def strict_chain_ok(self) -> bool:
        return self.loose_lower < self.value < self.loose_upper


def digit_bounds_check(x, n: int) -> DigitBoundsReport:
    """Evaluate |x Q_n - P_n| and its digit-product bounds, all exact.

    Tight bounds: 1/((d_n-1) d_{n+1}) and 1/((d_n-1)(d_{n+1}-1)).
    Loose bounds (from d >= 2): 1/(d_n d_{n+1}) and 4/(d_n d_{n+1}).
    """
    x = _check_domain(x)
    if n < 1:
        raise DomainError("need n >= 1")
    digs = []
    y = x
    for _ in range(n + 1):
        digs.append(first_digit(y))
        y = luroth_map(y)
    t = convergent(digs[:n])
    d_n, d_next = digs[n - 1], digs[n]
    value = abs(x * t.Q - t.P)
    return DigitBoundsReport(
        value=value,
        lower=Fraction(1, (d_n - 1) * d_next),
        upper=Fraction(1, (d_n - 1) * (d_next - 1)),
        loose_lower=Fraction(1, d_n * d_next),
        loose_upper=Fraction(4, d_n * d_next),
        d_n=d_n,
        d_next=d_next,
        all2_tail=(y == 1),
    )


def convergent_gcd_profile(x, n_max: int) -> list[tuple[int, int]]:
    """(n, gcd(P_n, Q_n)) for n = 1..n_max: the shared factor of the
    unsimplified convergent at each depth."""
    x = _check_domain(x)
    prefix = digit_prefix(x, n_max)
    out = []
    for n in range(1, n_max + 1):
        t = convergent(prefix[:n])
        out.append((n, gcd(t.P, t.Q)))
    return out


def expansion_table(x, n: int) -> list[dict]:
    """Per-depth rows (n, d_n, P_n, Q_n, error, cylinder length) for reports."""
    x = _check_domain(x)
    prefix = digit_prefix(x, n)
    rows = []
    for k in range(1, n + 1):
        t = convergent(prefix[:k])
        err = x - t.value
        rows.append(
            {
                "n": k,
                "d_n": prefix[k - 1],
                "P_n": t.P,
                "Q_n": t.Q,
                "error": format_rational(err),
                "cylinder_length": format_rational(t.cylinder_length),
            }
        )
    return rows
