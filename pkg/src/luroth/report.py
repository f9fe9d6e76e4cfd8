"""Deterministic output records and their CSV/JSON/figure writers.

Every record echoes its full parameter set; identical parameters must
produce byte-identical CSV/JSON files, so formatting avoids anything
environment- or time-dependent: floats serialize via repr (shortest
round-trip), high-precision values at 20 significant digits, rationals
as num/den.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import mpmath

from .exact import format_rational

SCHEMA_VERSION = 1


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 20)
    if isinstance(v, (list, tuple)):
        return "|".join(fmt_value(x) for x in v)
    if v is None:
        return ""
    return str(v)


@dataclass
class OutputRecord:
    command: str
    parameters: Dict[str, object]
    rows: List[Dict[str, object]]
    provenance: str
    schema_version: int = SCHEMA_VERSION

    def to_csv(self) -> str:
        lines = [f"# schema_version={self.schema_version}", f"# command={self.command}"]
        for key in sorted(self.parameters):
            lines.append(f"# {key}={fmt_value(self.parameters[key])}")
        lines.append(f"# provenance={self.provenance}")
        if self.rows:
            header: List[str] = []
            for row in self.rows:
                for col in row:
                    if col not in header:
                        header.append(col)
            lines.append(",".join(header))
            for row in self.rows:
                lines.append(",".join(fmt_value(row.get(col)) for col in header))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "schema_version": self.schema_version,
            "command": self.command,
            "parameters": {k: fmt_value(v) for k, v in sorted(self.parameters.items())},
            "provenance": self.provenance,
            "rows": [{k: fmt_value(v) for k, v in row.items()} for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")


def save_line_figure(
    path,
    xs: Sequence[float],
    series: Dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: str,
    logy: bool = False,
    extra_hline: Optional[float] = None,
):
    """Render a simple line plot to a file next to its CSV twin."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, ys in series.items():
        ax.plot(list(xs), list(ys), marker="o", markersize=3, linewidth=1.2, label=label)
    if extra_hline is not None:
        ax.axhline(extra_hline, color="grey", linestyle="--", linewidth=0.9)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": "luroth"})
    plt.close(fig)
