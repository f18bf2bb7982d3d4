"""Result tables and deterministic CSV emission.

Trajectory CSVs use the fixed header ``t_ms,t_g,g2,P0,P1,mean_n,purity,
trace_err``; numbers are written with 17 significant digits and an
undefined g2 becomes an empty field.  Every file starts with a provenance
comment block so a result can be traced back to its configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TRAJECTORY_HEADER = ("t_ms", "t_g", "g2", "P0", "P1", "mean_n", "purity", "trace_err")
REPORT_HEADER = ("check", "lhs", "rhs", "ratio", "analytic", "numeric", "rel_dev", "pass")


def fmt(value) -> str:
    """One CSV cell: full double precision, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and math.isnan(value):
        return ""
    if isinstance(value, str):
        return value
    return f"{value:.17g}"


@dataclass(frozen=True)
class ResultTable:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.header):
                raise ValueError(
                    f"row of width {len(r)} does not match header of width {len(self.header)}")

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]

    @property
    def n_rows(self) -> int:
        return len(self.rows)


def trajectory_table(traj) -> ResultTable:
    rows = []
    scaled = traj.times_scaled if traj.times_scaled is not None else traj.times_ms
    for k in range(len(traj.times_ms)):
        g2 = traj.g2[k]
        rows.append((
            float(traj.times_ms[k]),
            float(scaled[k]),
            None if np.isnan(g2) else float(g2),
            float(traj.p0[k]),
            float(traj.p1[k]),
            float(traj.mean_n[k]),
            float(traj.purity[k]),
            float(traj.trace_err[k]),
        ))
    return ResultTable(TRAJECTORY_HEADER, tuple(rows))


def sweep_table(res) -> ResultTable:
    header = ("t_ms", "omega_d_kHz", "phonon_fraction", "dark_pop", "bright_leak")
    rows = tuple(
        (float(res.times_ms[k]), float(res.omega_d_t[k]), float(res.phonon_fraction[k]),
         float(res.dark_pop[k]), float(res.bright_leak[k]))
        for k in range(len(res.times_ms))
    )
    return ResultTable(header, rows)


def regime_rows(report) -> list[tuple]:
    """RegimeReport rows in the shared report schema."""
    return [(r.name, r.lhs, r.rhs, r.ratio, None, None, None, r.passed) for r in report]


def oracle_rows(reports) -> list[tuple]:
    """OracleReport rows in the shared report schema."""
    return [(r.check, None, None, None, r.analytic, r.numeric, r.rel_dev, r.passed)
            for r in reports]


def render_csv(table: ResultTable, provenance: list[str] | None = None) -> str:
    lines = [f"# {line}" for line in (provenance or [])]
    lines.append(",".join(table.header))
    for row in table.rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, table: ResultTable, provenance: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_csv(table, provenance))
