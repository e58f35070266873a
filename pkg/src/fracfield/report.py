"""Deterministic CSV tables and dependency-free SVG line charts.

Every writer here is a pure function of its inputs: floats are rendered
with 17 significant digits (CSV) or fixed decimals (SVG coordinates),
lines end with LF, and nothing reads the clock or the environment — the
same data always produces the same bytes.
"""
import csv
import math

from .errors import DomainError

STATS_HEADER = ["example", "scale", "attract_excess", "attract_supdist",
                "enter_dist", "functional_sup"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b")


def format_cell(value):
    """CSV cell: 17-significant-digit floats, verbatim strings, '' for None."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return "%.17g" % float(value)


def write_csv(path, header, rows):
    """Comma-separated table with a header row and LF line endings."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def write_stats_csv(path, stats):
    """Per-schedule statistics table, one row per scale, schedule order."""
    write_csv(path, STATS_HEADER,
              [(s.example, s.scale, s.attract_excess, s.attract_supdist,
                s.enter_dist, s.functional_sup) for s in stats])


def _ticks(lo, hi, count=5):
    if not math.isfinite(lo) or not math.isfinite(hi):
        raise DomainError("chart data must be finite")
    if hi <= lo:
        pad = max(abs(lo), 1.0) * 0.5
        lo, hi = lo - pad, hi + pad
    step = (hi - lo) / (count - 1)
    return [lo + k * step for k in range(count)], lo, hi


def polyline_chart(series, title="", x_label="", y_label="", hlines=(),
                   width=640, height=400):
    """SVG string with one polyline per (name, xs, ys) series.

    hlines draws dashed horizontal guides (e.g. a monitoring corridor).
    Pure text generation — no plotting dependencies, stable byte output.
    """
    series = [(str(name), [float(v) for v in xs], [float(v) for v in ys])
              for name, xs, ys in series]
    if not series or any(len(xs) != len(ys) or not xs
                         for _, xs, ys in series):
        raise DomainError("each series needs equal, nonempty xs and ys")
    all_x = [v for _, xs, _ in series for v in xs]
    all_y = [v for _, _, ys in series for v in ys]
    all_y += [float(v) for v in hlines]
    xt, x_lo, x_hi = _ticks(min(all_x), max(all_x))
    yt, y_lo, y_hi = _ticks(min(all_y), max(all_y))
    mL, mR, mT, mB = 64, 160, 34, 46
    pw, ph = width - mL - mR, height - mT - mB

    def X(v):
        return mL + pw * (v - x_lo) / (x_hi - x_lo)

    def Y(v):
        return mT + ph * (y_hi - v) / (y_hi - y_lo)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width // 2}" y="20" text-anchor="middle" '
           f'font-family="sans-serif" font-size="14">{title}</text>']
    out.append(f'<line x1="{mL}" y1="{mT}" x2="{mL}" y2="{mT + ph}" '
               f'stroke="black"/>')
    out.append(f'<line x1="{mL}" y1="{mT + ph}" x2="{mL + pw}" '
               f'y2="{mT + ph}" stroke="black"/>')
    for v in xt:
        x = X(v)
        out.append(f'<line x1="{x:.2f}" y1="{mT + ph}" x2="{x:.2f}" '
                   f'y2="{mT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{mT + ph + 18}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{v:.4g}</text>')
    for v in yt:
        y = Y(v)
        out.append(f'<line x1="{mL - 5}" y1="{y:.2f}" x2="{mL}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{mL - 8}" y="{y + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{v:.4g}</text>')
    out.append(f'<text x="{mL + pw // 2}" y="{height - 8}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">{x_label}</text>')
    out.append(f'<text x="16" y="{mT + ph // 2}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 {mT + ph // 2})">{y_label}</text>')
    for v in hlines:
        y = Y(float(v))
        out.append(f'<line x1="{mL}" y1="{y:.2f}" x2="{mL + pw}" '
                   f'y2="{y:.2f}" stroke="#888888" stroke-dasharray="6 4"/>')
    for k, (name, xs, ys) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="2.6" '
                       f'fill="{color}"/>')
        ly = mT + 16 * (k + 1)
        out.append(f'<line x1="{mL + pw + 10}" y1="{ly - 4}" '
                   f'x2="{mL + pw + 34}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="1.8"/>')
        out.append(f'<text x="{mL + pw + 40}" y="{ly}" '
                   f'font-family="sans-serif" font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_text(path, text):
    """Write text with LF endings exactly as given."""
    with open(path, "w", newline="") as fh:
        fh.write(text)


def stats_charts(stats, hlines=()):
    """One chart per statistic vs. scale, keyed by statistic name."""
    scales = [s.scale for s in stats]
    charts = {}
    for name in ("attract_excess", "attract_supdist", "enter_dist",
                 "functional_sup"):
        ys = [getattr(s, name) for s in stats]
        if any(v is None for v in ys):
            continue
        guides = hlines if name == "functional_sup" else ()
        charts[name] = polyline_chart(
            [(name, scales, ys)], title=f"{stats[0].example}: {name}",
            x_label="scale", y_label=name, hlines=guides)
    return charts
