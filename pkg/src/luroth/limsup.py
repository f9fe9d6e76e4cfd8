"""Interval families over the convergent set, and exact union measure.

The convergent set S holds every (P, Q, d, depth) arising from some digit
tuple, enumerated by a pruned depth-first search (the block product grows
by at least a factor 2 per level, so pruning is exact) and re-ordered so
Q is non-decreasing with ties broken by (depth, digits).

Two enlargement devices live here and are deliberately distinct:

* blow_up: the general centre-preserving device, radius (half-length)
  raised to the power s, identity at s = 1.

* mtp_interval: the one-sided variant used on approximation targets
  (P/Q, P/Q + Q^-(1+tau)).  The left endpoint is the convergent itself
  and only the length is raised to the power s; approximation happens
  entirely to the right of P/Q, so enlarging symmetrically would spill
  half of the mass where no target point can lie.  At the critical
  exponent s = 1/(1+tau) the enlarged length is exactly 1/Q, which makes
  the coverage and inclusion statements exact rational facts:
  every enlarged interval contains its cylinder, and the cylinders of a
  fixed depth partition (0,1].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .core import ConvergentTriple, STriple, first_digit, luroth_map
from .exact import (
    CapExceededError,
    DomainError,
    format_rational,
    pow_bracket,
    pow_cmp,
)

DEFAULT_STREAM_CAP = 10**7


@dataclass(frozen=True)
class RatedInterval:
    """Interval with exact rational endpoints and endpoint-openness flags."""

    left: Fraction
    right: Fraction
    left_open: bool = True
    right_open: bool = True

    def __post_init__(self):
        if self.left > self.right:
            raise DomainError(f"left {self.left} > right {self.right}")

    @property
    def is_empty(self) -> bool:
        return self.left == self.right and (self.left_open or self.right_open)

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def center(self) -> Fraction:
        return (self.left + self.right) / 2

    @property
    def radius(self) -> Fraction:
        return (self.right - self.left) / 2

    def contains(self, x: Fraction) -> bool:
        if x < self.left or x > self.right:
            return False
        if x == self.left and self.left_open:
            return False
        if x == self.right and self.right_open:
            return False
        return True

    def subset_of(self, other: "RatedInterval") -> bool:
        if self.is_empty:
            return True
        left_ok = other.left < self.left or (
            other.left == self.left and (self.left_open or not other.left_open)
        )
        right_ok = other.right > self.right or (
            other.right == self.right and (self.right_open or not other.right_open)
        )
        return left_ok and right_ok

    def intersect(self, other: "RatedInterval") -> "RatedInterval":
        if self.left > other.left or (self.left == other.left and self.left_open):
            left, lo = self.left, self.left_open
        else:
            left, lo = other.left, other.left_open
        if self.right < other.right or (self.right == other.right and self.right_open):
            right, ro = self.right, self.right_open
        else:
            right, ro = other.right, other.right_open
        if left > right:
            return RatedInterval(left, left, True, True)
        return RatedInterval(left, right, lo, ro)

    def __str__(self) -> str:
        lb = "(" if self.left_open else "["
        rb = ")" if self.right_open else "]"
        return f"{lb}{format_rational(self.left)}, {format_rational(self.right)}{rb}"

    def csv_row(self) -> str:
        return (
            f"{format_rational(self.left)},{format_rational(self.right)},"
            f"{str(self.left_open).lower()},{str(self.right_open).lower()}"
        )


UNIT = RatedInterval(Fraction(0), Fraction(1), True, False)


# -- enumeration of the convergent set --------------------------------------


def _dfs_triples(
    Q_max: int,
    depth_exact: Optional[int],
    cap: int,
) -> List[STriple]:
    """Pruned DFS over digit tuples with Q <= Q_max.

    Carries the integer pair (N, B) with B the full block product of the
    prefix and N = (prefix partial sum) * B, so each emission costs O(1)
    integer work: Q = B*d and P = N*d + 1.
    """
    out: List[STriple] = []

    def walk(prefix: Tuple[int, ...], N: int, B: int):
        depth = len(prefix) + 1
        emit = depth_exact is None or depth == depth_exact
        recurse = depth_exact is None or depth < depth_exact
        d = 2
        while B * d <= Q_max:
            digs = prefix + (d,)
            if emit:
                if len(out) >= cap:
                    raise CapExceededError(
                        f"stream cap {cap} exceeded while enumerating triples"
                    )
                out.append(
                    ConvergentTriple(P=N * d + 1, Q=B * d, d_last=d, depth=depth, digits=digs)
                )
            if recurse and B * d * (d - 1) * 2 <= Q_max:
                walk(digs, N * d * (d - 1) + (d - 1), B * d * (d - 1))
            elif not emit:
                break  # block product grows with d, so no larger d completes
            d += 1

    walk((), 0, 1)
    out.sort(key=lambda t: (t.Q, t.depth, t.digits))
    return out


def enumerate_S(Q_max: int, cap: int = DEFAULT_STREAM_CAP) -> List[STriple]:
    """All digit tuples of any depth with Q <= Q_max, ordered by
    (Q, depth, digits)."""
    if Q_max < 2:
        raise DomainError("Q_max >= 2 required")
    return _dfs_triples(Q_max, None, cap)


def enumerate_S_k(k: int, Q_max: int, cap: int = DEFAULT_STREAM_CAP) -> List[STriple]:
    """The depth-exactly-k slice of the enumeration; 2^k is its least Q."""
    if k < 1:
        raise DomainError("k >= 1 required")
    if Q_max < 2**k:
        raise DomainError(f"Q_max={Q_max} < 2^{k}: the depth-{k} set is empty")
    return _dfs_triples(Q_max, k, cap)


# -- interval construction ---------------------------------------------------


def _rate_length(
    t: STriple, rate, rounding: str = "inner", dps: int = 30
) -> Tuple[Fraction, bool]:
    """Length of the approximation target for a triple: Q^-(1+tau) for a
    power rate, psi(Q)/Q for a rate object.  Returns (value, exact)."""
    if hasattr(rate, "psi_over_q_bracket"):
        lo, hi = rate.psi_over_q_bracket(t.Q, dps)
        if lo == hi:
            return lo, True
        return (lo if rounding == "inner" else hi), False
    tau = Fraction(rate)
    if tau < 0:
        raise DomainError("tau >= 0 required")
    lo, hi = pow_bracket(Fraction(t.Q), -(1 + tau), dps)
    if lo == hi:
        return lo, True
    return (lo if rounding == "inner" else hi), False


def rate_interval(t: STriple, rate, rounding: str = "inner", dps: int = 30) -> RatedInterval:
    """(P/Q, P/Q + r) cut down to the cylinder tail (P/Q, P/Q + 1/((d-1)Q)].

    When the cylinder is the binding side its closed right endpoint is
    kept, so ties resolve to the half-open cylinder.
    """
    r, _ = _rate_length(t, rate, rounding, dps)
    cyl = t.cylinder_length
    left = t.value
    if r < cyl:
        return RatedInterval(left, left + r, True, True)
    return RatedInterval(left, left + cyl, True, False)


def approx_interval(t: STriple, rate, rounding: str = "inner", dps: int = 30) -> RatedInterval:
    """The untruncated approximation target (P/Q, P/Q + r), open both sides."""
    r, _ = _rate_length(t, rate, rounding, dps)
    return RatedInterval(t.value, t.value + r, True, True)


def blow_up(interval: RatedInterval, s, rounding: str = "inner", dps: int = 30) -> RatedInterval:
    """Centre-preserving enlargement: radius rho -> rho^s, identity at s = 1.

    For radius <= 1 this is monotone: smaller s gives a larger interval.
    Irrational radii are rounded in the requested direction ('inner' keeps
    the result inside the true enlargement, 'outer' outside).
    """
    if interval.is_empty:
        raise DomainError("cannot blow up an empty interval")
    s = Fraction(s) if not isinstance(s, float) else s
    if not (0 < s <= 1):
        raise DomainError("s must lie in (0, 1]")
    if s == 1:
        return interval
    rho = interval.radius
    if rho == 0:
        return interval
    lo, hi = pow_bracket(rho, s, dps)
    rad = lo if rounding == "inner" else hi
    c = interval.center
    return RatedInterval(c - rad, c + rad, True, True)


def mtp_interval(
    t: STriple, tau, s, rounding: str = "inner", dps: int = 30
) -> RatedInterval:
    """One-sided enlargement of the approximation target: the left anchor
    P/Q stays put and the length Q^-(1+tau) is raised to the power s,
    giving (P/Q, P/Q + Q^-((1+tau)s)).

    At s = 1/(1+tau) the exponent collapses to 1 and the result is exactly
    (P/Q, P/Q + 1/Q), with no rounding anywhere.
    """
    tau = Fraction(tau)
    s = Fraction(s)
    if tau < 0 or not (0 < s <= 1):
        raise DomainError("need tau >= 0 and s in (0, 1]")
    e = (1 + tau) * s
    lo, hi = pow_bracket(Fraction(t.Q), -e, dps)
    r = lo if rounding == "inner" else hi
    return RatedInterval(t.value, t.value + r, True, True)


def mtp_inclusion_holds(t: STriple, tau, s=None, dps: int = 30) -> bool:
    """Whether (P/Q, P/Q + 1/Q) sits inside the one-sided enlargement at s
    (critical exponent 1/(1+tau) by default).  Exact for rational tau, s."""
    tau = Fraction(tau)
    if s is None:
        s = Fraction(1, 1) / (1 + tau)
    blown = mtp_interval(t, tau, s, rounding="inner", dps=dps)
    target = RatedInterval(t.value, t.value + Fraction(1, t.Q), True, True)
    return target.subset_of(blown)


@dataclass(frozen=True)
class CoverLevel:
    """A fixed-depth slice of the cover construction.

    Streams the rated intervals of every depth-n triple with Q <= q_cap;
    the underlying cylinders partition (0,1] up to the enumeration cap.
    Level families grow fast with depth, so intervals() is a generator
    and consumers are expected to stream it.
    """

    depth: int
    rate: object
    q_cap: int = 10**4

    def triples(self) -> List[STriple]:
        return enumerate_S_k(self.depth, self.q_cap)

    def intervals(self, rounding: str = "inner", dps: int = 30):
        for t in self.triples():
            yield rate_interval(t, self.rate, rounding=rounding, dps=dps)

    def measure(self) -> Fraction:
        """Exact measure of the streamed union, clipped to (0,1]."""
        return union_measure(self.intervals(), clip=UNIT)


# -- measure -----------------------------------------------------------------


def union_measure(
    intervals: Iterable[RatedInterval],
    clip: Optional[RatedInterval] = None,
    cap: int = DEFAULT_STREAM_CAP,
) -> Fraction:
    """Lebesgue measure of a finite union, exact; openness cannot matter."""
    segs = []
    n = 0
    for itv in intervals:
        n += 1
        if n > cap:
            raise CapExceededError(f"stream cap {cap} exceeded in union_measure")
        if itv.is_empty:
            continue
        left, right = itv.left, itv.right
        if clip is not None:
            left = max(left, clip.left)
            right = min(right, clip.right)
            if left >= right:
                continue
        if left < right:
            segs.append((left, right))
    segs.sort()
    total = Fraction(0)
    cur_l: Optional[Fraction] = None
    cur_r: Optional[Fraction] = None
    for left, right in segs:
        if cur_r is None:
            cur_l, cur_r = left, right
        elif left <= cur_r:
            if right > cur_r:
                cur_r = right
        else:
            total += cur_r - cur_l
            cur_l, cur_r = left, right
    if cur_r is not None:
        total += cur_r - cur_l
    return total


# -- finite-depth evidence ---------------------------------------------------


def finite_depth_hits(x, rate, N: int) -> List[int]:
    """Depths n <= N where 0 < x - P_n/Q_n < psi(Q_n)/Q_n (power rate:
    < Q_n^-(1+tau)), all comparisons exact.

    Finite evidence only; membership in the limsup set needs infinitely
    many hits and is not decidable here.
    """
    if isinstance(x, float):
        raise DomainError("floats are not accepted; pass an exact Fraction")
    x = Fraction(x)
    if not (0 < x <= 1):
        raise DomainError("x must lie in (0, 1]")
    if N < 1:
        raise DomainError("N >= 1 required")
    use_psi = hasattr(rate, "hit_compare")
    if not use_psi:
        tau = Fraction(rate)
        if tau < 0:
            raise DomainError("tau >= 0 required")
    hits = []
    y = x
    Npart, B = 0, 1
    for n in range(1, N + 1):
        d = first_digit(y)
        y = luroth_map(y)
        Q = B * d
        P = Npart * d + 1
        err = x - Fraction(P, Q)
        if err > 0:
            if use_psi:
                if rate.hit_compare(err, Q):
                    hits.append(n)
            elif pow_cmp(Fraction(Q), -(1 + tau), err) > 0:
                hits.append(n)
        Npart = Npart * d * (d - 1) + (d - 1)
        B = B * d * (d - 1)
    return hits


# -- coverage of the unit interval by enlarged families ----------------------


@dataclass(frozen=True)
class CoverageReport:
    """Result of a depth-level coverage computation.

    certified_full means the value 1 is exact: every enlarged interval
    provably contains its own cylinder (checked rationally on the
    enumerated family, and implied for the un-enumerated remainder by
    Q^-((1+tau)s) >= 1/Q >= cylinder length whenever (1+tau)s <= 1),
    and the fixed-depth cylinders partition (0,1].  Otherwise the value
    is the exact union measure of the enumerated, inner-rounded family:
    a certified lower bound for the full level.
    """

    tau: Fraction
    s: Fraction
    depth: int
    measure: Fraction
    certified_full: bool
    enumerated: int
    q_cap: int
    rounding: str = "inner"
    note: str = ""


def mtp_coverage(
    tau,
    s,
    depth: int,
    q_cap: int = 10**4,
    dps: int = 30,
    cap: int = DEFAULT_STREAM_CAP,
) -> CoverageReport:
    """Measure of (0,1] covered by the one-sided enlargements of all
    depth-n approximation targets.

    The family at a fixed depth is infinite (digits are unbounded), so a
    finite run enumerates Q <= q_cap and treats the remainder through the
    regime inequality; see CoverageReport.
    """
    tau = Fraction(tau)
    s = Fraction(s)
    if tau < 0 or not (0 < s <= 1):
        raise DomainError("need tau >= 0 and s in (0, 1]")
    if depth < 1:
        raise DomainError("depth >= 1 required")
    e = (1 + tau) * s
    triples = enumerate_S_k(depth, q_cap, cap=cap) if q_cap >= 2**depth else []
    if e <= 1:
        for t in triples:
            if pow_cmp(Fraction(t.Q), -e, t.cylinder_length) < 0:
                raise AssertionError(
                    f"regime certificate violated at {t}: enlarged length "
                    f"below cylinder length"
                )
        return CoverageReport(
            tau=tau,
            s=s,
            depth=depth,
            measure=Fraction(1),
            certified_full=True,
            enumerated=len(triples),
            q_cap=q_cap,
            note="every enlarged interval covers its cylinder; cylinders partition (0,1]",
        )
    intervals = (mtp_interval(t, tau, s, rounding="inner", dps=dps) for t in triples)
    measure = union_measure(intervals, clip=UNIT, cap=cap)
    return CoverageReport(
        tau=tau,
        s=s,
        depth=depth,
        measure=measure,
        certified_full=False,
        enumerated=len(triples),
        q_cap=q_cap,
        note=f"lower bound over the enumerated family (Q <= {q_cap})",
    )
