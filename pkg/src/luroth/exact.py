"""Exact helpers shared by all modules: rational parsing, integer roots,
exact comparison of rational powers, and certified rational enclosures of
irrational powers.

Everything here either returns an exact Fraction or an explicitly
directed (lower, upper) rational bracket; nothing silently rounds.
"""

from __future__ import annotations

import decimal
from fractions import Fraction
from typing import Optional, Tuple, Union

import mpmath

Rational = Fraction
RealLike = Union[int, float, Fraction]


class DomainError(ValueError):
    """Input outside the documented domain of an operation."""


class DivergentSeriesError(ValueError):
    """Series parameter outside its convergence region."""


class CapExceededError(RuntimeError):
    """A configured resource cap (stream size, iteration count) was hit."""


def parse_rational(text: str) -> Fraction:
    """Parse 'num/den', an integer, or a decimal string into an exact Fraction."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        if any(c in text for c in ".eE"):
            return Fraction(decimal.Decimal(text))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError, decimal.InvalidOperation) as exc:
        raise DomainError(f"not a rational: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    """Lowest-terms num/den form; integers print without a denominator."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def as_fraction(x: RealLike) -> Fraction:
    """Exact conversion; floats convert via their binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise DomainError(f"cannot convert {type(x).__name__} exactly")


def iroot(n: int, k: int) -> Tuple[int, bool]:
    """Integer k-th root of n >= 0: returns (r, exact) with r = floor(n**(1/k)).

    Pure integer Newton iteration, so arbitrarily large n is fine.
    """
    if n < 0 or k < 1:
        raise DomainError("iroot needs n >= 0, k >= 1")
    if n in (0, 1) or k == 1:
        return n, True
    if k >= n.bit_length():
        return 1, False  # 2 <= n < 2^k forces the root into (1, 2)
    r = 1 << ((n.bit_length() + k - 1) // k)  # overestimate
    while True:
        nr = ((k - 1) * r + n // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r, r**k == n


def rational_pow(base: Fraction, exp: Fraction) -> Optional[Fraction]:
    """base**exp as an exact Fraction, or None when the value is irrational.

    base must be positive. Integer exponents always succeed.
    """
    if base <= 0:
        raise DomainError("rational_pow needs base > 0")
    exp = Fraction(exp)
    p, q = exp.numerator, exp.denominator
    if q == 1:
        return base**p
    num_root, num_ok = iroot(base.numerator, q)
    if not num_ok:
        return None
    den_root, den_ok = iroot(base.denominator, q)
    if not den_ok:
        return None
    return Fraction(num_root, den_root) ** p


def pow_cmp(base: Fraction, exp: Fraction, rhs: Fraction) -> int:
    """Exact sign of base**exp - rhs for positive rationals base, rhs.

    Rational exponent p/q is resolved by comparing base**p with rhs**q,
    which is exact integer arithmetic.
    """
    if base <= 0 or rhs <= 0:
        raise DomainError("pow_cmp needs base > 0 and rhs > 0")
    exp = Fraction(exp)
    lhs = base ** exp.numerator
    right = rhs**exp.denominator
    if lhs == right:
        return 0
    return 1 if lhs > right else -1


def _fraction_from_raw(t) -> Fraction:
    """Exact value of a raw (sign, man, exp, bc) float tuple."""
    sign, man, e, _ = t
    man = int(man)
    if man == 0:
        if e == 0:
            return Fraction(0)
        raise DomainError("non-finite value cannot convert to a rational")
    val = Fraction(man) * (Fraction(2) ** e)
    return -val if sign else val


def mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    """Exact value of an mpf (every finite mpf is a dyadic rational)."""
    return _fraction_from_raw(mpmath.mpf(x)._mpf_)


def pow_bracket(base: Fraction, exp: RealLike, dps: int = 30) -> Tuple[Fraction, Fraction]:
    """Certified rational bracket lo <= base**exp <= hi.

    Takes the exact route when the power is rational; otherwise uses
    interval arithmetic at the requested working precision.
    """
    if base <= 0:
        raise DomainError("pow_bracket needs base > 0")
    if isinstance(exp, (int, Fraction)) or (isinstance(exp, float) and exp == int(exp)):
        exact = rational_pow(base, Fraction(exp))
        if exact is not None:
            return exact, exact
    iv = mpmath.iv
    old = iv.dps
    try:
        iv.dps = dps
        b = iv.mpf(base.numerator) / iv.mpf(base.denominator)
        if isinstance(exp, Fraction):
            e = iv.mpf(exp.numerator) / iv.mpf(exp.denominator)
        else:
            e = iv.mpf(exp)
        val = iv.exp(e * iv.log(b))
        # read the raw endpoint tuples: the .a/.b accessors re-round through
        # the global context and would forfeit the directed bounds
        raw_lo, raw_hi = val._mpi_
        lo = _fraction_from_raw(raw_lo)
        hi = _fraction_from_raw(raw_hi)
    finally:
        iv.dps = old
    if lo > hi:
        lo, hi = hi, lo
    return lo, hi
