"""Exact arithmetic for Luroth expansions, the interval families built on
their convergents, and desk-scale estimators for the measure and dimension
of the associated well-approximable sets."""

from .core import (
    ConvergentTriple,
    Cylinder,
    DigitSeq,
    STriple,
    approximation_error,
    convergent,
    cylinder,
    digit_bounds_check,
    digit_prefix,
    digits,
    evaluate,
    first_digit,
    luroth_map,
)
from .estimators import (
    BoxCountFit,
    CoverSum,
    MCReport,
    PressureRoot,
    box_count_dim,
    cover_sum,
    digit_series,
    mc_hit_fraction,
    pressure_root,
    dimension_decay_table,
)
from .exact import (
    CapExceededError,
    DivergentSeriesError,
    DomainError,
    format_rational,
    parse_rational,
)
from .limsup import (
    CoverLevel,
    CoverageReport,
    RatedInterval,
    blow_up,
    enumerate_S,
    enumerate_S_k,
    finite_depth_hits,
    mtp_coverage,
    mtp_interval,
    rate_interval,
    union_measure,
)
from .psi import (
    OrderEstimate,
    PsiSpec,
    SeriesReport,
    dodson_series,
    khintchine_series,
    lambda_order_estimate,
    monotonicity_violations,
    nu2,
    order_estimate,
    psi_eval,
    theta,
)

__version__ = "0.1.0"
