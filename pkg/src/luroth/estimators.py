"""Quantitative engines: the two digit series and their pressure-type
root, geometric cover-sum bounds, exact dyadic box counting, and seeded
Monte Carlo hit fractions.

Numerical policy: series are evaluated with explicitly bounded
truncation tails (geometric ratio bounds plus integral comparisons) at a
working precision of 30 significant digits by default; root finding runs
a bracketed Illinois iteration in fast float arithmetic and reports its
residual re-evaluated at full precision.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import mpmath
from mpmath import mp

from .core import first_digit, luroth_map
from .exact import DivergentSeriesError, DomainError
from .limsup import enumerate_S_k, rate_interval
from .psi import PsiSpec

DEFAULT_DPS = 30
MC_CHUNK = 256
MC_Q_CAP_BITS = 48
MC_DENOMINATOR_BITS = 64


# -- the two digit series ----------------------------------------------------


def _to_mpf(value):
    """Exact conversion at the current working precision."""
    if isinstance(value, Fraction):
        return mp.mpf(value.numerator) / value.denominator
    return mp.mpf(value)


def _zeta_minus_1(ctx, x, eps):
    """zeta(x) - 1 with |error| <= eps; direct sums with an integral tail
    bound once x is large, the library zeta below that."""
    if x < 25:
        return ctx.zeta(x) - 1
    total = ctx.mpf(0)
    n = 2
    while True:
        total += ctx.power(n, -x)
        # remaining tail <= integral_n^inf t^-x dt
        if ctx.power(n, 1 - x) / (x - 1) <= eps:
            return total
        n += 1


def _pair_series(ctx, a, eps):
    """sum over d >= 2 of (d(d-1))^-a via the binomial-zeta expansion

        (d(d-1))^-a = d^-2a (1 - 1/d)^-a
                    = sum_k binom(a+k-1, k) d^-(2a+k),

    all terms positive, so the swap of sums is legitimate and truncation
    is one-sided.  Stops when the term ratio bound (a+k)/(2(k+1)) <= 3/4
    makes the remaining tail <= 3 * last term <= eps.
    """
    total = ctx.mpf(0)
    c = ctx.mpf(1)
    k = 0
    while True:
        t = c * _zeta_minus_1(ctx, 2 * a + k, eps / 16)
        total += t
        if k + 1 >= 2 * a and 3 * t <= eps:
            return total
        k += 1
        c = c * (a + k - 1) / k


def digit_series(exponent, kind: str = "pair", dps: int = DEFAULT_DPS) -> mpmath.mpf:
    """The per-level factors of the cover sums.

    pair:   sum_{d>=2} (d(d-1))^-a, convergent for a > 1/2; at a = 1 the
            sum telescopes to exactly 1.
    single: sum_{d>=2} d^-a = zeta(a) - 1, convergent for a > 1.

    Absolute truncation error is bounded by 10^-(dps-2).
    """
    a = float(exponent)
    if kind == "pair":
        if a <= 0.5:
            raise DivergentSeriesError(f"pair series diverges for exponent {a} <= 1/2")
        if exponent == 1:
            return mp.mpf(1)  # telescoping: sum 1/(d-1) - 1/d
        with mp.workdps(dps + 10):
            eps = mp.mpf(10) ** (-(dps + 2))
            return +_pair_series(mp, _to_mpf(exponent), eps)
    if kind == "single":
        if a <= 1:
            raise DivergentSeriesError(f"single series diverges for exponent {a} <= 1")
        with mp.workdps(dps + 10):
            return +(mp.zeta(_to_mpf(exponent)) - 1)
    raise DomainError(f"kind must be 'pair' or 'single', got {kind!r}")


def _pair_float(a: float) -> float:
    """Fast float-precision pair series for the root search inner loop."""
    if a == 1.0:
        return 1.0
    return _pair_series(mpmath.fp, a, 1e-17)


# -- pressure-type critical exponent -----------------------------------------


@dataclass(frozen=True)
class PressureRoot:
    """Root of the per-level contraction factor hitting 1.

    The pair series at exponent (1+tau)s equals 1 exactly at s = 1/(1+tau)
    because sum 1/(d(d-1)) telescopes; the root finder recovers this
    numerically and the residual is re-checked at full precision.
    """

    tau: float
    s_star: float
    residual: float
    iterations: int

    def __post_init__(self):
        if not (0 < self.s_star <= 1):
            raise DomainError(f"critical exponent {self.s_star} outside (0, 1]")


def pressure_root(tau, tol: float = 1e-12, dps: int = DEFAULT_DPS) -> PressureRoot:
    """Solve pair((1+tau)s) = 1 for s by bracketed Illinois iteration.

    The map s -> pair((1+tau)s) is strictly decreasing, so the root is
    unique; the bracket [0.55, 2.5] in exponent space always contains it.
    """
    tau_f = float(tau)
    if tau_f < 0:
        raise DomainError("tau >= 0 required")
    scale = 1.0 + tau_f

    def f(s: float) -> float:
        return _pair_float(scale * s) - 1.0

    a, b = 0.55 / scale, 2.5 / scale
    fa, fb = f(a), f(b)
    iterations = 2
    assert fa > 0 > fb
    while abs(b - a) > tol * max(1.0, abs(b)) and iterations < 200:
        c = b - fb * (b - a) / (fb - fa)
        fc = f(c)
        iterations += 1
        if fc == 0.0:
            a, fa = c, fc
            b, fb = c, fc
            break
        if fb * fc < 0:
            a, fa = b, fb
        else:
            fa = fa / 2  # Illinois weighting keeps the bracket moving
        b, fb = c, fc
    s_star = b
    with mp.workdps(dps + 10):
        eps = mp.mpf(10) ** (-(dps + 2))
        residual = float(abs(_pair_series(mp, mp.mpf(scale) * s_star, eps) - 1))
    return PressureRoot(tau=tau_f, s_star=s_star, residual=residual, iterations=iterations)


# -- cover sums ---------------------------------------------------------------


@dataclass(frozen=True)
class CoverSum:
    """Level-n cover bound r^(n-1) * C with its two series factors.

    r is the pair series and C the single series, both at exponent
    (1+tau+j)s; r < 1 exactly when s > 1/(1+tau+j), which is also the
    convergence condition."""

    tau: float
    j: int
    s: float
    n: int
    value: mpmath.mpf
    r: mpmath.mpf
    C: mpmath.mpf


def _cover_exponent(tau, j: int, s):
    """(1+tau+j)*s, kept exact when both parameters are exact."""
    if isinstance(tau, (int, Fraction)) and isinstance(s, (int, Fraction)):
        return (1 + Fraction(tau) + j) * Fraction(s)
    return (1 + float(tau) + j) * float(s)


def cover_sum(tau, j: int, s, n: int, dps: int = DEFAULT_DPS) -> CoverSum:
    """Closed-form total of diam^s over all depth >= n covers at the
    2-adic weight j (j = 0 recovers the unweighted construction)."""
    if j < 0 or n < 1:
        raise DomainError("need j >= 0 and n >= 1")
    exponent = _cover_exponent(tau, j, s)
    if float(exponent) <= 1:
        raise DivergentSeriesError(
            f"cover sum needs s > 1/(1+tau+j); got exponent {float(exponent):.6f} <= 1"
        )
    r = digit_series(exponent, "pair", dps)
    C = digit_series(exponent, "single", dps)
    with mp.workdps(dps + 10):
        value = +(r ** (n - 1) * C)
    return CoverSum(tau=float(tau), j=j, s=float(s), n=n, value=value, r=r, C=C)


def decay_depth(tau, j: int, s, threshold: float = 1e-6, dps: int = DEFAULT_DPS) -> int:
    """Smallest depth N with cover_sum value below threshold."""
    base = cover_sum(tau, j, s, 1, dps)
    if base.value < threshold:
        return 1
    n = 1 + int(mp.ceil(mp.log(threshold / base.C) / mp.log(base.r)))
    while cover_sum(tau, j, s, n, dps).value >= threshold:
        n += 1
    while n > 1 and cover_sum(tau, j, s, n - 1, dps).value < threshold:
        n -= 1
    return n


@dataclass(frozen=True)
class DecayRow:
    j: int
    s: float
    r: float
    C: float
    N: int
    value_at_N: float
    dim_upper_bound: float


def dimension_decay_table(
    tau,
    j_list: Sequence[int],
    s_margin,
    threshold: float = 1e-6,
    dps: int = DEFAULT_DPS,
) -> List[DecayRow]:
    """For each 2-adic weight j, the dimension witness table: at
    s = 1/(1+tau+j) + margin the cover sums decay geometrically, so the
    dimension cannot exceed 1/(1+tau+j); larger j pushes the bound toward 0.
    """
    if float(s_margin) <= 0:
        raise DomainError("s_margin must be positive")
    exact_params = isinstance(tau, (int, Fraction)) and isinstance(s_margin, (int, Fraction))
    rows = []
    for j in j_list:
        if exact_params:
            s = Fraction(1, 1) / (1 + Fraction(tau) + j) + Fraction(s_margin)
        else:
            s = 1.0 / (1 + float(tau) + j) + float(s_margin)
        N = decay_depth(tau, j, s, threshold, dps)
        cs = cover_sum(tau, j, s, N, dps)
        rows.append(
            DecayRow(
                j=j,
                s=float(s),
                r=float(cs.r),
                C=float(cs.C),
                N=N,
                value_at_N=float(cs.value),
                dim_upper_bound=1.0 / (1 + float(tau) + j),
            )
        )
    return rows


# -- box counting -------------------------------------------------------------


@dataclass(frozen=True)
class BoxCountFit:
    """Exact dyadic cell counts against grid exponents with the fitted
    log2 slope.  Counts are exact; only the least-squares fit is float."""

    ms: Tuple[int, ...]
    counts: Tuple[int, ...]
    slope: float
    residual: float
    depth: int
    q_cap: int
    warning: str = ""

    def __post_init__(self):
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise DomainError("cell counts must be non-decreasing in m")


def _count_cells(segments: List[Tuple[Fraction, Fraction]], m: int) -> int:
    """Number of dyadic cells [i 2^-m, (i+1) 2^-m) in [0,1] meeting the
    union of open segments; exact integer arithmetic."""
    count = 0
    last = -1
    scale = 1 << m
    for left, right in segments:
        lo = (left.numerator * scale) // left.denominator
        hi = -((-right.numerator * scale) // right.denominator) - 1
        lo = max(lo, 0, last + 1)
        hi = min(hi, scale - 1)
        if hi >= lo:
            count += hi - lo + 1
            last = hi
    return count


def box_count_dim(
    tau,
    depth: int,
    m_range: Sequence[int],
    q_cap: int = 30_000,
    dps: int = DEFAULT_DPS,
) -> BoxCountFit:
    """Box-counting slope of the union of depth-n approximation intervals
    with Q <= q_cap, on dyadic grids 2^-m.

    Cell membership is decided in exact rational arithmetic so each N(m)
    is an exact integer; the slope of log2 N(m) against m is the one
    empirical (least-squares) step.
    """
    ms = sorted(set(int(m) for m in m_range))
    if len(ms) < 2:
        raise DomainError("box-count fit needs at least two grid exponents")
    if depth < 1:
        raise DomainError("depth >= 1 required")
    triples = enumerate_S_k(depth, q_cap)
    intervals = [rate_interval(t, Fraction(tau), dps=dps) for t in triples]
    segs = sorted((iv.left, iv.right) for iv in intervals if not iv.is_empty)
    # merge overlaps once; cells are then counted over disjoint segments
    merged: List[Tuple[Fraction, Fraction]] = []
    for left, right in segs:
        if merged and left <= merged[-1][1]:
            if right > merged[-1][1]:
                merged[-1] = (merged[-1][0], right)
        else:
            merged.append((left, right))
    counts = [_count_cells(merged, m) for m in ms]
    min_len = min((right - left for left, right in merged), default=Fraction(0))
    warning = ""
    if merged and Fraction(1, 1 << ms[0]) <= min_len:
        warning = (
            f"coarsest cell 2^-{ms[0]} is not larger than the smallest "
            f"interval ({min_len}); slope may saturate"
        )
    ys = [math.log2(c) if c > 0 else 0.0 for c in counts]
    mbar = sum(ms) / len(ms)
    ybar = sum(ys) / len(ys)
    denom = sum((m - mbar) ** 2 for m in ms)
    slope = sum((m - mbar) * (y - ybar) for m, y in zip(ms, ys)) / denom
    resid = max(abs(y - (ybar + slope * (m - mbar))) for m, y in zip(ms, ys))
    return BoxCountFit(
        ms=tuple(ms),
        counts=tuple(counts),
        slope=slope,
        residual=resid,
        depth=depth,
        q_cap=q_cap,
        warning=warning,
    )


# -- Monte Carlo hit fractions ------------------------------------------------


@dataclass(frozen=True)
class MCReport:
    """Seeded hit-fraction record: trend evidence, not a measure value.

    Samples are uniform dyadic rationals (k+1)/2^64 with k derived from
    SHA-256 of (seed, index), so runs are bitwise reproducible and
    independent of worker count.  Depths whose denominator exceeds 2^48
    are skipped: past that point the digits reflect the dyadic truncation,
    not the sampled point.  capped_samples counts the misses that never
    saw the full window; tested_fraction conditions them away, giving the
    hit rate among samples testable up to the cap.
    """

    seed: int
    samples: int
    window: Tuple[int, int]
    hits: int
    hit_fraction: Fraction
    spec: str
    capped_samples: int

    @property
    def tested_fraction(self) -> Fraction:
        tested = self.samples - self.capped_samples
        return Fraction(self.hits, tested) if tested else Fraction(0)


def _mc_sample_value(seed: int, index: int) -> Fraction:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    k = int.from_bytes(digest[:8], "big")
    return Fraction(k + 1, 1 << MC_DENOMINATOR_BITS)


def _mc_chunk(args) -> Tuple[int, int, int]:
    spec, n0, n1, seed, start, stop = args
    q_cap = 1 << MC_Q_CAP_BITS
    hits = 0
    capped = 0
    for idx in range(start, stop):
        x = _mc_sample_value(seed, idx)
        y = x
        Npart, B = 0, 1
        hit = False
        reached = 0
        for n in range(1, n1 + 1):
            d = first_digit(y)
            Q = B * d
            if Q > q_cap:
                break
            reached = n
            if n >= n0:
                err = x - Fraction(Npart * d + 1, Q)
                if err > 0 and spec.hit_compare(err, Q):
                    hit = True
                    break
            y = luroth_map(y)
            Npart = Npart * d * (d - 1) + (d - 1)
            B = B * d * (d - 1)
        if hit:
            hits += 1
        elif reached < n1:
            capped += 1
    return start, hits, capped


def mc_hit_fraction(
    spec: PsiSpec,
    window: Tuple[int, int],
    M: int,
    seed: int,
    threads: int = 1,
) -> MCReport:
    """Fraction of M seeded samples with at least one hit depth inside the
    window; per-sample arithmetic is exact."""
    n0, n1 = int(window[0]), int(window[1])
    if M < 1:
        raise DomainError("M >= 1 required")
    if not (1 <= n0 <= n1):
        raise DomainError(f"bad window {window}")
    chunks = [
        (spec, n0, n1, int(seed), start, min(start + MC_CHUNK, M))
        for start in range(0, M, MC_CHUNK)
    ]
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_mc_chunk, chunks))
    else:
        results = [_mc_chunk(c) for c in chunks]
    results.sort(key=lambda r: r[0])
    hits = sum(r[1] for r in results)
    capped = sum(r[2] for r in results)
    return MCReport(
        seed=int(seed),
        samples=M,
        window=(n0, n1),
        hits=hits,
        hit_fraction=Fraction(hits, M),
        spec=str(spec),
        capped_samples=capped,
    )
