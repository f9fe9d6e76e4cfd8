"""Command-line front end.

Subcommands: expand, eval, enum-s, dim, measure, mtp, orders, report.
Exit codes: 0 success, 2 usage error, 3 domain or parse error,
4 resource-cap error.  Identical invocations produce byte-identical
output files; --threads never changes any value, only wall time.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

from .core import DigitSeq, digits, evaluate, expansion_table
from .estimators import (
    DEFAULT_DPS,
    box_count_dim,
    mc_hit_fraction,
    pressure_root,
    dimension_decay_table,
)
from .exact import CapExceededError, DivergentSeriesError, DomainError, parse_rational
from .limsup import enumerate_S, enumerate_S_k, mtp_coverage
from .psi import (
    PsiSpec,
    dodson_series,
    khintchine_series,
    lambda_order_estimate,
    order_estimate,
)
from .report import OutputRecord, fmt_value, save_line_figure

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CAP = 4


def _windows_arg(text: str) -> List[Tuple[int, int]]:
    out = []
    for piece in text.split(","):
        try:
            a, b = piece.split(":")
            lo, hi = int(a), int(b)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad window {piece!r}, expected N0:N1") from exc
        if not (1 <= lo <= hi):
            raise argparse.ArgumentTypeError(f"bad window {piece!r}: need 1 <= N0 <= N1")
        out.append((lo, hi))
    return out


def _grid_arg(text: str) -> List[int]:
    try:
        a, b = text.split(":")
        lo, hi = int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, expected M0:M1") from exc
    if lo > hi:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: need M0 <= M1")
    return list(range(lo, hi + 1))


def _int_list_arg(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--qmax", type=int, default=None)
    parser.add_argument("--depth", type=int, default=None)
    parser.add_argument("--precision", type=int, default=DEFAULT_DPS)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="luroth", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("expand", help="digit/convergent table of a rational")
    sp.add_argument("x", help="rational in (0,1], as num/den")
    _common(sp)

    sp = sub.add_parser("eval", help="exact value of a periodic digit sequence")
    sp.add_argument("seq", help="digit sequence [d1,...;p1,...]")
    _common(sp)

    sp = sub.add_parser("enum-s", help="enumerate convergent triples with Q <= qmax")
    sp.add_argument("--k", type=int, default=None, help="restrict to depth exactly k")
    _common(sp)

    sp = sub.add_parser("dim", help="dimension estimates (pressure, box, cover)")
    sp.add_argument("--tau", type=parse_rational, default=None)
    sp.add_argument("--psi", type=str, default=None)
    sp.add_argument("--method", choices=("pressure", "box", "cover"), required=True)
    sp.add_argument("--grid", type=_grid_arg, default=None, help="box grid M0:M1")
    sp.add_argument("--j", type=_int_list_arg, default=None, help="2-adic weights, comma list")
    sp.add_argument("--margin", type=parse_rational, default=Fraction(1, 20))
    _common(sp)

    sp = sub.add_parser("measure", help="Monte Carlo hit fractions and series tables")
    sp.add_argument("--psi", type=str, required=True)
    sp.add_argument("--windows", type=_windows_arg, default=[(1, 5), (6, 10)])
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--checkpoints", type=_int_list_arg, default=[10, 100, 1000, 10000])
    sp.add_argument("--dodson-s", type=parse_rational, default=None)
    _common(sp)

    sp = sub.add_parser("mtp", help="coverage of (0,1] by enlarged convergent intervals")
    sp.add_argument("--tau", type=parse_rational, required=True)
    sp.add_argument("--s", type=parse_rational, required=True)
    _common(sp)

    sp = sub.add_parser("orders", help="window estimates of the orders at infinity")
    sp.add_argument("--psi", type=str, required=True)
    sp.add_argument("--qmin", type=int, default=2)
    sp.add_argument("--k", type=int, default=None, help="restrict to the depth-k denominator set")
    _common(sp)

    sp = sub.add_parser("report", help="battery of tables and figures into a directory")
    sp.add_argument("--psi", type=str, default="power:tau=1")
    sp.add_argument("--samples", type=int, default=500)
    _common(sp)

    return p


def _echo(args, skip=("out", "format")) -> dict:
    return {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in skip and not k.startswith("_") and k != "command"
    }


def _psi_from_args(args) -> Optional[PsiSpec]:
    return PsiSpec.parse(args.psi) if getattr(args, "psi", None) else None


def _require_tau(args, spec: Optional[PsiSpec]) -> Fraction:
    if args.tau is not None:
        if args.tau < 0:
            raise DomainError("tau must be >= 0")
        return args.tau
    if spec is not None and spec.tau is not None:
        return spec.tau
    raise DomainError("this method needs --tau or a psi family carrying tau")


def cmd_expand(args) -> OutputRecord:
    x = parse_rational(args.x)
    depth = args.depth or 8
    rows = expansion_table(x, depth)
    seq = digits(x, depth)
    params = _echo(args)
    params["digitseq"] = str(seq)
    params["periodic"] = seq.period is not None
    return OutputRecord("expand", params, rows, "exact rational arithmetic")


def cmd_eval(args) -> OutputRecord:
    seq = DigitSeq.parse(args.seq)
    value = evaluate(seq)
    return OutputRecord(
        "eval", _echo(args), [{"value": value}], "exact rational arithmetic"
    )


def cmd_enum_s(args) -> OutputRecord:
    q_max = args.qmax or 100
    triples = enumerate_S_k(args.k, q_max) if args.k else enumerate_S(q_max)
    rows = [
        {"P": t.P, "Q": t.Q, "d": t.d_last, "depth": t.depth, "digits": t.digits}
        for t in triples
    ]
    return OutputRecord("enum-s", _echo(args), rows, "exact rational arithmetic")


def cmd_dim(args) -> OutputRecord:
    spec = _psi_from_args(args)
    dps = args.precision
    if args.method == "pressure":
        tau = _require_tau(args, spec)
        pr = pressure_root(tau, dps=dps)
        theory = 1.0 / (1.0 + float(tau))
        rows = [
            {
                "tau": tau,
                "s_star": pr.s_star,
                "theory": theory,
                "abs_error": abs(pr.s_star - theory),
                "residual": pr.residual,
                "iterations": pr.iterations,
            }
        ]
        return OutputRecord(
            "dim", _echo(args), rows, f"high-precision series, bounded tails (dps={dps})"
        )
    if args.method == "box":
        tau = _require_tau(args, spec)
        depth = args.depth or 6
        grid = args.grid or list(range(6, 13))
        q_cap = args.qmax or 30_000
        fit = box_count_dim(tau, depth, grid, q_cap=q_cap, dps=dps)
        rows = [{"m": m, "cells": c} for m, c in zip(fit.ms, fit.counts)]
        params = _echo(args)
        params.update(
            slope=fit.slope,
            fit_residual=fit.residual,
            theory=1.0 / (1.0 + float(tau)),
            warning=fit.warning,
        )
        return OutputRecord(
            "dim", params, rows, "exact dyadic cell counts; least-squares slope"
        )
    # cover
    tau = _require_tau(args, spec)
    j_list = args.j if args.j is not None else list(range(0, 7))
    rows_out = []
    for row in dimension_decay_table(tau, j_list, args.margin, dps=dps):
        rows_out.append(
            {
                "j": row.j,
                "s": row.s,
                "r": row.r,
                "C": row.C,
                "N": row.N,
                "value_at_N": row.value_at_N,
                "dim_upper_bound": row.dim_upper_bound,
            }
        )
    return OutputRecord(
        "dim", _echo(args), rows_out, f"high-precision series, bounded tails (dps={dps})"
    )


def cmd_measure(args) -> OutputRecord:
    spec = PsiSpec.parse(args.psi)
    rows = []
    for window in args.windows:
        rep = mc_hit_fraction(spec, window, args.samples, args.seed, threads=args.threads)
        rows.append(
            {
                "table": "windows",
                "window": f"{window[0]}:{window[1]}",
                "hits": rep.hits,
                "samples": rep.samples,
                "fraction": rep.hit_fraction,
                "tested_fraction": rep.tested_fraction,
                "capped_samples": rep.capped_samples,
            }
        )
    kh = khintchine_series(spec, args.checkpoints)
    for q, v in kh.partial_sums:
        rows.append({"table": "khintchine", "Q": q, "partial_sum": v})
    s = args.dodson_s
    if s is None:
        s = 1 / (1 + spec.tau) if spec.tau is not None else Fraction(1)
    dd = dodson_series(spec, s, args.checkpoints)
    for q, v in dd.partial_sums:
        rows.append({"table": "dodson", "Q": q, "partial_sum": v})
    params = _echo(args)
    params["windows"] = ",".join(f"{a}:{b}" for a, b in args.windows)
    params.update(
        khintchine_verdict=kh.verdict,
        khintchine_analytic=kh.analytic_verdict,
        dodson_s=s,
        dodson_verdict=dd.verdict,
        dodson_analytic=dd.analytic_verdict,
    )
    return OutputRecord(
        "measure",
        params,
        rows,
        "seeded Monte Carlo with exact per-sample arithmetic; float series partials",
    )


def cmd_mtp(args) -> OutputRecord:
    depth = args.depth or 3
    q_cap = args.qmax or 10_000
    rep = mtp_coverage(args.tau, args.s, depth, q_cap=q_cap, dps=args.precision)
    rows = [
        {
            "tau": rep.tau,
            "s": rep.s,
            "depth": rep.depth,
            "coverage_float": float(rep.measure),
            "coverage": rep.measure,
            "certified_full": rep.certified_full,
            "enumerated": rep.enumerated,
            "q_cap": rep.q_cap,
            "rounding": rep.rounding,
            "note": rep.note,
        }
    ]
    return OutputRecord(
        "mtp", _echo(args), rows, "exact rational arithmetic, inner-rounded enlargements"
    )


def cmd_orders(args) -> OutputRecord:
    spec = PsiSpec.parse(args.psi)
    q_max = args.qmax or 10_000
    if args.k:
        est = lambda_order_estimate(spec, args.k, q_max)
    else:
        est = order_estimate(spec, args.qmin, q_max)
    dim_lo, dim_hi = est.dim_bracket
    rows = [
        {
            "lower_order": est.lower,
            "upper_order": est.upper,
            "dim_lower_bound": dim_lo,
            "dim_upper_bound": dim_hi,
            "q_min": est.q_min,
            "q_max": est.q_max,
            "restricted_k": est.restricted_k,
            "exact": est.exact,
        }
    ]
    return OutputRecord(
        "orders", _echo(args), rows, "window-extremal scan (exact exponents where available)"
    )


def cmd_report(args) -> List[Path]:
    """Battery: tables as CSV plus matplotlib figures rendered next to them."""
    if args.out is None:
        raise DomainError("report needs --out DIR")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = PsiSpec.parse(args.psi)
    tau = spec.tau if spec.tau is not None else Fraction(1)
    dps = args.precision
    written: List[Path] = []

    def emit(name: str, record: OutputRecord):
        path = outdir / f"{name}.csv"
        path.write_text(record.to_csv())
        written.append(path)

    # expansion showcase: a periodic orbit
    x = Fraction(27, 71)
    rows = expansion_table(x, 8)
    seq = digits(x, 8)
    emit(
        "expansion",
        OutputRecord(
            "expand",
            {"x": x, "depth": 8, "digitseq": str(seq)},
            rows,
            "exact rational arithmetic",
        ),
    )

    # pressure roots against theory
    taus = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(5), Fraction(10)]
    prows = []
    for t in taus:
        pr = pressure_root(t, dps=dps)
        prows.append(
            {
                "tau": t,
                "s_star": pr.s_star,
                "theory": 1.0 / (1.0 + float(t)),
                "residual": pr.residual,
            }
        )
    emit(
        "pressure",
        OutputRecord(
            "dim", {"method": "pressure", "taus": taus}, prows, f"series roots (dps={dps})"
        ),
    )
    save_line_figure(
        outdir / "pressure.png",
        [float(t) for t in taus],
        {
            "critical exponent": [r["s_star"] for r in prows],
            "1/(1+tau)": [r["theory"] for r in prows],
        },
        xlabel="tau",
        ylabel="s",
        title="Critical exponent vs tau",
    )
    written.append(outdir / "pressure.png")

    # series partial sums for the requested rate
    checkpoints = [10, 100, 1000, 10000]
    kh = khintchine_series(spec, checkpoints)
    s_dodson = 1 / (1 + tau)
    dd = dodson_series(spec, s_dodson, checkpoints)
    srows = [
        {"table": "khintchine", "Q": q, "partial_sum": v} for q, v in kh.partial_sums
    ] + [{"table": "dodson", "Q": q, "partial_sum": v} for q, v in dd.partial_sums]
    emit(
        "series",
        OutputRecord(
            "measure",
            {
                "psi": str(spec),
                "checkpoints": checkpoints,
                "khintchine_verdict": kh.verdict,
                "dodson_verdict": dd.verdict,
                "dodson_s": s_dodson,
            },
            srows,
            "float partial sums",
        ),
    )
    save_line_figure(
        outdir / "series.png",
        [math.log10(q) for q, _ in kh.partial_sums],
        {
            "khintchine": [v for _, v in kh.partial_sums],
            f"dodson (s={fmt_value(s_dodson)})": [v for _, v in dd.partial_sums],
        },
        xlabel="log10 Q",
        ylabel="partial sum",
        title=f"Series partial sums for {spec}",
    )
    written.append(outdir / "series.png")

    # coverage at the critical exponent and at s = 1
    crows = []
    s_crit = 1 / (1 + tau)
    for depth in range(1, 6):
        rep = mtp_coverage(tau, s_crit, depth, q_cap=args.qmax or 5000, dps=dps)
        crows.append(
            {
                "s": rep.s,
                "depth": depth,
                "coverage_float": float(rep.measure),
                "certified_full": rep.certified_full,
            }
        )
    for depth in range(1, 4):
        rep = mtp_coverage(tau, Fraction(1), depth, q_cap=args.qmax or 5000, dps=dps)
        crows.append(
            {
                "s": rep.s,
                "depth": depth,
                "coverage_float": float(rep.measure),
                "certified_full": rep.certified_full,
            }
        )
    emit(
        "coverage",
        OutputRecord(
            "mtp",
            {"tau": tau, "s_critical": s_crit, "q_cap": args.qmax or 5000},
            crows,
            "exact rational arithmetic",
        ),
    )

    # cover-sum decay table and figure
    drows = []
    for row in dimension_decay_table(tau, range(0, 7), Fraction(1, 20), dps=dps):
        drows.append(
            {
                "j": row.j,
                "s": row.s,
                "r": row.r,
                "N": row.N,
                "value_at_N": row.value_at_N,
                "dim_upper_bound": row.dim_upper_bound,
            }
        )
    emit(
        "decay",
        OutputRecord(
            "dim",
            {"method": "cover", "tau": tau, "margin": Fraction(1, 20)},
            drows,
            f"series with bounded tails (dps={dps})",
        ),
    )
    save_line_figure(
        outdir / "decay.png",
        [r["j"] for r in drows],
        {"dimension upper bound": [r["dim_upper_bound"] for r in drows]},
        xlabel="2-adic weight j",
        ylabel="bound",
        title=f"Dimension upper bounds, tau={fmt_value(tau)}",
    )
    written.append(outdir / "decay.png")

    # box counting
    depth = args.depth or 6
    fit = box_count_dim(tau, depth, range(6, 13), q_cap=args.qmax or 20_000, dps=dps)
    brows = [{"m": m, "cells": c} for m, c in zip(fit.ms, fit.counts)]
    emit(
        "box",
        OutputRecord(
            "dim",
            {
                "method": "box",
                "tau": tau,
                "depth": depth,
                "slope": fit.slope,
                "theory": 1.0 / (1.0 + float(tau)),
            },
            brows,
            "exact dyadic cell counts",
        ),
    )
    save_line_figure(
        outdir / "box.png",
        list(fit.ms),
        {"log2 cells": [math.log2(c) if c else 0.0 for c in fit.counts]},
        xlabel="grid exponent m",
        ylabel="log2 N(m)",
        title=f"Box counting, tau={fmt_value(tau)}, depth {depth} (slope {fit.slope:.3f})",
    )
    written.append(outdir / "box.png")

    # order estimates
    est = order_estimate(spec, 3, args.qmax or 10_000)
    dim_lo, dim_hi = est.dim_bracket
    emit(
        "orders",
        OutputRecord(
            "orders",
            {"psi": str(spec), "q_min": 3, "q_max": args.qmax or 10_000},
            [
                {
                    "lower_order": est.lower,
                    "upper_order": est.upper,
                    "dim_lower_bound": dim_lo,
                    "dim_upper_bound": dim_hi,
                }
            ],
            "window-extremal scan",
        ),
    )

    # index of everything written
    summary = OutputRecord(
        "report",
        _echo(args),
        [{"file": p.name} for p in sorted(written)],
        "see individual files",
    )
    (outdir / "summary.json").write_text(summary.to_json())
    written.append(outdir / "summary.json")
    return written


_COMMANDS = {
    "expand": cmd_expand,
    "eval": cmd_eval,
    "enum-s": cmd_enum_s,
    "dim": cmd_dim,
    "measure": cmd_measure,
    "mtp": cmd_mtp,
    "orders": cmd_orders,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "report":
            written = cmd_report(args)
            for path in written:
                print(path)
            return EXIT_OK
        record = _COMMANDS[args.command](args)
        text = record.render(args.format)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DomainError, DivergentSeriesError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
