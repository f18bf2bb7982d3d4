"""Minimal self-contained SVG line charts, no plotting dependency.

One panel per observable against the dimensionless time column.  Output is
a pure function of the input table: the same table renders to the same
bytes.  Gaps (missing values, e.g. undefined g2) break the polyline instead
of being interpolated.
"""

from __future__ import annotations

from .tables import ResultTable

PANEL_W = 640
PANEL_H = 160
MARGIN_L = 70
MARGIN_R = 15
MARGIN_T = 22
MARGIN_B = 28
STROKE = "#1f6fb2"


def _fnum(x: float) -> str:
    return f"{x:.6g}"


def _panel(x_vals, y_vals, name: str, offset_y: int) -> list[str]:
    pts = [(x, y) for x, y in zip(x_vals, y_vals) if y is not None]
    if pts:
        ymin = min(y for _, y in pts)
        ymax = max(y for _, y in pts)
    else:
        ymin, ymax = 0.0, 1.0
    if ymax - ymin < 1e-300:
        pad = max(abs(ymax), 1.0) * 0.05
        ymin -= pad
        ymax += pad
    xmin, xmax = min(x_vals), max(x_vals)
    if xmax - xmin <= 0:
        xmax = xmin + 1.0
    iw = PANEL_W - MARGIN_L - MARGIN_R
    ih = PANEL_H - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - xmin) / (xmax - xmin) * iw

    def sy(y):
        return offset_y + MARGIN_T + (ymax - y) / (ymax - ymin) * ih

    out = [
        f'<rect x="{MARGIN_L}" y="{offset_y + MARGIN_T}" width="{iw}" height="{ih}" '
        f'fill="none" stroke="#999" stroke-width="1"/>',
        f'<text x="{MARGIN_L}" y="{offset_y + MARGIN_T - 6}" font-size="12" '
        f'font-family="monospace">{name}</text>',
        f'<text x="{MARGIN_L - 6}" y="{offset_y + MARGIN_T + 10}" font-size="10" '
        f'font-family="monospace" text-anchor="end">{_fnum(ymax)}</text>',
        f'<text x="{MARGIN_L - 6}" y="{offset_y + MARGIN_T + ih}" font-size="10" '
        f'font-family="monospace" text-anchor="end">{_fnum(ymin)}</text>',
        f'<text x="{MARGIN_L}" y="{offset_y + PANEL_H - 8}" font-size="10" '
        f'font-family="monospace">{_fnum(xmin)}</text>',
        f'<text x="{PANEL_W - MARGIN_R}" y="{offset_y + PANEL_H - 8}" font-size="10" '
        f'font-family="monospace" text-anchor="end">{_fnum(xmax)}</text>',
    ]
    # split the series at gaps so missing points are rendered as breaks
    segment: list[str] = []
    segments: list[list[str]] = []
    for x, y in zip(x_vals, y_vals):
        if y is None:
            if segment:
                segments.append(segment)
                segment = []
            continue
        segment.append(f"{sx(x):.2f},{sy(y):.2f}")
    if segment:
        segments.append(segment)
    for seg in segments:
        if len(seg) == 1:
            seg = seg + seg  # lone point: zero-length stroke keeps it visible
        out.append(f'<polyline fill="none" stroke="{STROKE}" stroke-width="1.5" '
                   f'points="{" ".join(seg)}"/>')
    return out


def render_plot(table: ResultTable, x_column: str = "t_g",
                observables: tuple[str, ...] | None = None) -> str:
    """Render stacked line panels; raises on an empty table."""
    if table.n_rows == 0:
        raise ValueError("cannot plot an empty table")
    if observables is None:
        observables = tuple(c for c in table.header if c not in (x_column, "t_ms", "trace_err"))
    x_vals = [float(v) for v in table.column(x_column)]
    height = PANEL_H * len(observables)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" '
        f'viewBox="0 0 {PANEL_W} {height}">',
        f'<rect width="{PANEL_W}" height="{height}" fill="white"/>',
    ]
    for i, name in enumerate(observables):
        parts.extend(_panel(x_vals, table.column(name), f"{name} vs {x_column}", i * PANEL_H))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(table: ResultTable, path, x_column: str = "t_g",
              observables: tuple[str, ...] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_plot(table, x_column, observables))
