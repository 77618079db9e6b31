"""Plot-ready data files and a small dependency-free SVG line plot."""

from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

from .harness import ResultTable

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def figure_series(table: ResultTable, x: str = "byzantine_fraction", metric: str = "rel_l2") -> dict:
    """``{(experiment, strategy): {algorithm: [(x, mean, std), ...]}}`` from the aggregate rows."""
    agg: dict = {}
    for row in table.aggregate():
        key = tuple(row[c] for c in ("experiment", "strategy", "algorithm", "byzantine_fraction", "n", "k"))
        agg.setdefault(key, {})[row["stat"]] = row[metric]
    figures: dict = {}
    for (exp, strat, algo, bf, n, k), stats in agg.items():
        xv = {"byzantine_fraction": bf, "n": n, "k": k}[x]
        figures.setdefault((exp, strat), {}).setdefault(algo, []).append((xv, stats["mean"], stats["std"]))
    for series in figures.values():
        for points in series.values():
            points.sort()
    return figures


def write_figure_data(table: ResultTable, prefix, x: str = "byzantine_fraction",
                      metrics=("rel_l2", "kendall_tau"), svg: bool = True) -> list[Path]:
    """One CSV per (experiment, strategy, metric) with columns ``x, <algo>, <algo>_std, ...``."""
    written = []
    prefix = str(prefix)
    for metric in metrics:
        for (exp, strat), series in figure_series(table, x, metric).items():
            algos = sorted(series)
            xs = sorted({p[0] for pts in series.values() for p in pts})
            lookup = {a: {p[0]: p[1:] for p in series[a]} for a in algos}
            path = Path(f"{prefix}_{exp}_{strat}_{metric}.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow([x] + [c for a in algos for c in (a, f"{a}_std")])
                for xv in xs:
                    row = [repr(xv) if isinstance(xv, float) else xv]
                    for a in algos:
                        mean, std = lookup[a].get(xv, ("", ""))
                        row += [repr(mean) if mean != "" else "", repr(std) if std != "" else ""]
                    w.writerow(row)
            written.append(path)
            if svg:
                svg_path = path.with_suffix(".svg")
                svg_path.write_text(line_plot_svg(series, title=f"{strat}: {metric}", xlabel=x, ylabel=metric))
                written.append(svg_path)
    return written


def line_plot_svg(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
                  width: int = 480, height: int = 320) -> str:
    """Render ``{label: [(x, y, err), ...]}`` as an SVG string with error bars."""
    left, right, top, bottom = 60, 110, 30, 45
    pts = [p for points in series.values() for p in points]
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0 = min(p[1] - p[2] for p in pts)
    y1 = max(p[1] + p[2] for p in pts)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1
    pad = (y1 - y0) * 0.05
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (1 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 14 {top + ph / 2:.1f})">{escape(ylabel)}</text>']
    for t in range(5):
        yv = y0 + (y1 - y0) * t / 4
        xv = x0 + (x1 - x0) * t / 4
        out.append(f'<text x="{left - 4}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
        out.append(f'<text x="{sx(xv):.1f}" y="{top + ph + 15}" text-anchor="middle">{xv:.3g}</text>')
    for idx, (label, points) in enumerate(sorted(series.items())):
        color = _COLORS[idx % len(_COLORS)]
        path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y, _ in points)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y, err in points:
            out.append(f'<line x1="{sx(x):.1f}" y1="{sy(y - err):.1f}" x2="{sx(x):.1f}" y2="{sy(y + err):.1f}" stroke="{color}"/>')
            out.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="2.5" fill="{color}"/>')
        ly = top + 12 + 16 * idx
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 28}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 32}" y="{ly + 4}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
