"""Report, table, and plot generation from a results file.

Rendering is a pure function of the results content: no clock, network,
or environment reads happen here, so re-rendering the same results.json
is byte-identical. Reports come in Markdown (default) and TeX; plots are
emitted as self-contained SVG files plus plain-text CSV data files.

The ``plot_opt`` keys keep their configuration names: ``save_eps`` gates
the vector (SVG) file of each plot kind and ``save_fig`` gates the CSV
data file.
"""

import math
import os
from dataclasses import dataclass

from .exceptions import EmptySeries, UnknownFormat
from .model import parse_problem_id

PLOT_KINDS = ("bode", "sigma", "frobenius", "error")

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#e377c2", "#17becf")

_FAILED_MARK = "—"  # em dash cell marker for failed runs


@dataclass(frozen=True)
class Report:
    """Rendered report description: header data, tables, file references."""

    header: dict
    runtime_table: tuple
    error_table: tuple
    plot_refs: tuple
    format: str


def scale_runtimes(times):
    """Scale a series of positive wall times by its maximum.

    The maximum maps to exactly 1.0 (ties included). Raises
    :class:`EmptySeries` when there is nothing to scale (all runs failed).
    """
    times = list(times)
    if not times:
        raise EmptySeries("no successful runs to scale")
    peak = max(times)
    if peak <= 0:
        raise EmptySeries("wall times must be positive")
    return [t / peak for t in times]


def format_norm(value):
    """Error-table cell format: 3 significant digits, 2-digit exponent.

    Examples: 2.2251e-6 -> "2.23e-06", 0 -> "0.00e+00", inf -> "inf".
    """
    if math.isinf(value):
        return "inf"
    return f"{value:.2e}"


def _fmt(value):
    """Deterministic short float format for SVG coordinates and labels."""
    return f"{value:.6g}"


def _svg_header(width, height, title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" font-weight="bold">{title}</text>',
    ]


def _log_ticks(lo, hi, limit=9):
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    step = max(1, math.ceil((hi_e - lo_e) / limit))
    return [10.0 ** e for e in range(lo_e, hi_e + 1, step)]


def _line_chart(path, title, curves):
    """Log-log polyline chart; nonpositive values are dropped per point."""
    width, height = 640, 440
    x0, x1, y0, y1 = 70, width - 20, height - 50, 40
    finite_x = [x for _, xs, ys in curves for x, y in zip(xs, ys) if x > 0]
    finite_y = [y for _, xs, ys in curves for x, y in zip(xs, ys) if x > 0 and y > 0]
    parts = _svg_header(width, height, title)
    if finite_x and finite_y:
        lx0, lx1 = math.log10(min(finite_x)), math.log10(max(finite_x))
        ly0, ly1 = math.log10(min(finite_y)), math.log10(max(finite_y))
        if lx1 - lx0 < 1e-12:
            lx0, lx1 = lx0 - 0.5, lx1 + 0.5
        if ly1 - ly0 < 1e-12:
            ly0, ly1 = ly0 - 0.5, ly1 + 0.5

        def sx(value):
            return x0 + (math.log10(value) - lx0) / (lx1 - lx0) * (x1 - x0)

        def sy(value):
            return y0 - (math.log10(value) - ly0) / (ly1 - ly0) * (y0 - y1)

        for tick in _log_ticks(10 ** lx0, 10 ** lx1):
            if not 10 ** lx0 <= tick <= 10 ** (lx1 + 1e-9):
                continue
            tx = sx(tick)
            parts.append(f'<line x1="{_fmt(tx)}" y1="{y0}" x2="{_fmt(tx)}" y2="{y1}" '
                         'stroke="#dddddd"/>')
            parts.append(f'<text x="{_fmt(tx)}" y="{y0 + 16}" text-anchor="middle" '
                         f'font-family="sans-serif" font-size="10">{tick:.0e}</text>')
        for tick in _log_ticks(10 ** ly0, 10 ** ly1):
            if not 10 ** ly0 <= tick <= 10 ** (ly1 + 1e-9):
                continue
            ty = sy(tick)
            parts.append(f'<line x1="{x0}" y1="{_fmt(ty)}" x2="{x1}" y2="{_fmt(ty)}" '
                         'stroke="#dddddd"/>')
            parts.append(f'<text x="{x0 - 6}" y="{_fmt(ty + 3)}" text-anchor="end" '
                         f'font-family="sans-serif" font-size="10">{tick:.0e}</text>')
        for k, (label, xs, ys) in enumerate(curves):
            color = _PALETTE[k % len(_PALETTE)]
            points = " ".join(
                f"{_fmt(sx(x))},{_fmt(sy(y))}"
                for x, y in zip(xs, ys) if x > 0 and y > 0)
            if points:
                parts.append(f'<polyline fill="none" stroke="{color}" '
                             f'stroke-width="1.5" points="{points}"/>')
            ly = 54 + 14 * k
            parts.append(f'<line x1="{x1 - 150}" y1="{ly - 4}" x2="{x1 - 130}" '
                         f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{x1 - 125}" y="{ly}" font-family="sans-serif" '
                         f'font-size="10">{label}</text>')
    else:
        parts.append(f'<text x="{width / 2}" y="{height / 2}" text-anchor="middle" '
                     'font-family="sans-serif" font-size="12">no positive data</text>')
    parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
                 'fill="none" stroke="black"/>')
    parts.append(f'<text x="{(x0 + x1) / 2}" y="{height - 14}" text-anchor="middle" '
                 'font-family="sans-serif" font-size="11">angular frequency [rad/s]</text>')
    parts.append('</svg>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _bar_chart(path, title, bars, note):
    width = 640
    height = 120 + 34 * max(len(bars), 1)
    parts = _svg_header(width, height, title)
    x0, x1 = 150, width - 40
    y = 50
    for k, (label, value) in enumerate(bars):
        color = _PALETTE[k % len(_PALETTE)]
        parts.append(f'<text x="{x0 - 8}" y="{y + 14}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{label}</text>')
        if value is None:
            parts.append(f'<text x="{x0 + 4}" y="{y + 14}" font-family="sans-serif" '
                         f'font-size="11">failed</text>')
        else:
            bar_w = max((x1 - x0) * value, 1.0)
            parts.append(f'<rect x="{x0}" y="{y}" width="{_fmt(bar_w)}" height="20" '
                         f'fill="{color}"/>')
            parts.append(f'<text x="{_fmt(x0 + bar_w + 6)}" y="{y + 14}" '
                         f'font-family="sans-serif" font-size="11">{value:.3f}</text>')
        y += 34
    parts.append(f'<text x="{width / 2}" y="{y + 24}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="10" fill="#555555">{note}</text>')
    parts.append('</svg>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _curve_set(results, kind):
    """Assemble (label, omega, values) triples for one plot kind."""
    curves = []
    first_ok = None
    for record in results.runs:
        if record.status == "ok" and record.isotope in results.measures:
            first_ok = results.measures[record.isotope]
            break
    if first_ok is None:
        return curves
    block = first_ok.freq_samples.get(kind)
    if block is None:
        return curves

    def channels(values, label):
        # scalar curves stay single; vector-valued kinds fan out per channel
        if values and isinstance(values[0], list):
            width = len(values[0])
            for ch in range(width):
                suffix = f"[{ch + 1}]" if width > 1 else ""
                yield (f"{label}{suffix}", [row[ch] for row in values])
        else:
            yield (label, list(values))

    if kind == "error":
        for record in results.runs:
            ms = results.measures.get(record.isotope)
            if ms is None or kind not in ms.freq_samples:
                continue
            entry = ms.freq_samples[kind]
            curves.extend((lab, entry["omega"], vals)
                          for lab, vals in channels(entry["value"], record.isotope))
        return curves

    curves.extend((lab, block["omega"], vals)
                  for lab, vals in channels(block["original"], "original"))
    for record in results.runs:
        ms = results.measures.get(record.isotope)
        if ms is None or kind not in ms.freq_samples:
            continue
        entry = ms.freq_samples[kind]
        curves.extend((lab, entry["omega"], vals)
                      for lab, vals in channels(entry["reduced"], record.isotope))
    return curves


def emit_plots(results, plot_opt, out_dir):
    """Write plot files for every kind with frequency samples.

    Per kind: an SVG (log-log, one curve per isotope plus the original
    where applicable) when ``save_eps`` is set, and a CSV data file
    (header row with curve labels, first column omega) when ``save_fig``
    is set. Returns the list of written paths.
    """
    plot_opt = plot_opt or {}
    save_svg = bool(plot_opt.get("save_eps", True))
    save_csv = bool(plot_opt.get("save_fig", True))
    os.makedirs(out_dir, exist_ok=True)
    written = []
    titles = {
        "bode": "Bode magnitudes",
        "sigma": "singular values of G(iw)",
        "frobenius": "Frobenius norm of G(iw)",
        "error": "largest singular value of the error system",
    }
    for kind in PLOT_KINDS:
        curves = _curve_set(results, kind)
        if not curves:
            continue
        if save_svg:
            svg_path = os.path.join(out_dir, f"{kind}.svg")
            _line_chart(svg_path, f"{titles[kind]}: {results.problem_id}", curves)
            written.append(svg_path)
        if save_csv:
            csv_path = os.path.join(out_dir, f"{kind}.csv")
            _write_csv(csv_path, curves)
            written.append(csv_path)
    return written


def _write_csv(path, curves):
    omega = curves[0][1]
    header = ["omega"] + [label for label, _, _ in curves]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k, w in enumerate(omega):
            row = [repr(float(w))]
            for _, xs, ys in curves:
                row.append(repr(float(ys[k])) if k < len(ys) else "")
            fh.write(",".join(row) + "\n")


def _runtime_rows(results):
    ok_times = [r.wall_time_s for r in results.runs if r.status == "ok"]
    scaled_map = {}
    if ok_times:
        scaled = scale_runtimes(ok_times)
        it = iter(scaled)
        scaled_map = {r.isotope: next(it) for r in results.runs if r.status == "ok"}
    rows = []
    for record in results.runs:
        if record.status == "ok":
            rows.append((record.isotope, f"{record.wall_time_s:.4f}",
                         f"{scaled_map[record.isotope]:.3f}"))
        else:
            rows.append((record.isotope, f"{record.wall_time_s:.4f}", _FAILED_MARK))
    return rows


def _error_rows(results):
    norm_ids = []
    for record in results.runs:
        ms = results.measures.get(record.isotope)
        if ms is not None:
            norm_ids = list(ms.norms.keys())
            break
    rows = []
    for record in results.runs:
        ms = results.measures.get(record.isotope)
        if ms is None:
            continue
        rows.append((record.isotope,
                     tuple(format_norm(ms.norms[nid]) for nid in norm_ids)))
    return norm_ids, rows


def build_report(results, fmt="md", plot_refs=()):
    """Collect header, tables, and references for rendering."""
    if fmt not in ("md", "tex"):
        raise UnknownFormat(f"unknown report format {fmt!r}")
    try:
        _, n, m, q = parse_problem_id(results.problem_id)
        size = f"n={n}, m={m}, q={q}"
    except Exception:
        size = "unknown"
    header = {
        "timestamp": results.env.timestamp,
        "benchmark": results.problem_id,
        "operating system": results.env.os_name_version,
        "tool version": results.env.tool_version,
        "hostname": results.env.hostname,
        "problem size": size,
        "jobs": str(results.jobs),
    }
    return Report(
        header=header,
        runtime_table=tuple(_runtime_rows(results)),
        error_table=(_error_rows(results)),
        plot_refs=tuple(plot_refs),
        format=fmt,
    )


def _tex_escape(text):
    for src, dst in (("\\", r"\textbackslash{}"), ("_", r"\_"), ("%", r"\%"),
                     ("&", r"\&"), ("#", r"\#"), ("$", r"\$")):
        text = text.replace(src, dst)
    return text


def _render_md(report, chart_name):
    lines = []
    for key, value in report.header.items():
        lines.append(f"<!-- {key}: {value} -->")
    lines.append("")
    lines.append(f"# Benchmark report: {report.header['benchmark']}")
    lines.append("")
    lines.append("## Run Details")
    lines.append("")
    lines.append("| field | value |")
    lines.append("| --- | --- |")
    for key, value in report.header.items():
        lines.append(f"| {key} | {value} |")
    lines.append("")
    lines.append("## Run Times")
    lines.append("")
    if report.header["jobs"] != "1":
        lines.append("Timings come from a parallel run (jobs > 1) and are "
                     "not comparable.")
        lines.append("")
    lines.append("| isotope | wall time [s] | scaled |")
    lines.append("| --- | --- | --- |")
    for label, wall, scaled in report.runtime_table:
        lines.append(f"| {label} | {wall} | {scaled} |")
    lines.append("")
    lines.append(f"![runtime chart]({chart_name})")
    lines.append("")
    lines.append("## Error Norms")
    lines.append("")
    norm_ids, rows = report.error_table
    if rows:
        lines.append("| isotope | " + " | ".join(norm_ids) + " |")
        lines.append("| --- |" + " --- |" * len(norm_ids))
        for label, cells in rows:
            lines.append(f"| {label} | " + " | ".join(cells) + " |")
    else:
        lines.append("No successful runs.")
    lines.append("")
    lines.append("## Plots")
    lines.append("")
    for ref in report.plot_refs:
        lines.append(f"- [{os.path.basename(ref)}]({os.path.basename(ref)})")
    if not report.plot_refs:
        lines.append("No plots were emitted.")
    lines.append("")
    return "\n".join(lines)


def _render_tex(report, chart_name):
    lines = []
    for key, value in report.header.items():
        lines.append(f"% {key}: {value}")
    lines.append(r"\documentclass{article}")
    lines.append(r"\usepackage{graphicx}")
    lines.append(r"\begin{document}")
    title = _tex_escape(report.header["benchmark"])
    lines.append(rf"\section*{{Benchmark report: {title}}}")
    lines.append(r"\subsection*{Run Details}")
    lines.append(r"\begin{tabular}{ll}")
    for key, value in report.header.items():
        lines.append(rf"{_tex_escape(key)} & {_tex_escape(str(value))} \\")
    lines.append(r"\end{tabular}")
    lines.append(r"\subsection*{Run Times}")
    if report.header["jobs"] != "1":
        lines.append("Timings come from a parallel run (jobs"
                     r" $>$ 1) and are not comparable.")
    lines.append(r"\begin{tabular}{lrr}")
    lines.append(r"isotope & wall time [s] & scaled \\ \hline")
    for label, wall, scaled in report.runtime_table:
        mark = scaled if scaled != _FAILED_MARK else "--"
        lines.append(rf"{_tex_escape(label)} & {wall} & {mark} \\")
    lines.append(r"\end{tabular}")
    lines.append("")
    lines.append(rf"\includegraphics[width=0.8\textwidth]{{{chart_name}}}")
    lines.append(r"\subsection*{Error Norms}")
    norm_ids, rows = report.error_table
    if rows:
        lines.append(r"\begin{tabular}{l" + "r" * len(norm_ids) + "}")
        lines.append("isotope & " + " & ".join(norm_ids) + r" \\ \hline")
        for label, cells in rows:
            lines.append(rf"{_tex_escape(label)} & " + " & ".join(cells) + r" \\")
        lines.append(r"\end{tabular}")
    else:
        lines.append("No successful runs.")
    lines.append(r"\subsection*{Plots}")
    lines.append(r"\begin{itemize}")
    for ref in report.plot_refs:
        lines.append(rf"\item \texttt{{{_tex_escape(os.path.basename(ref))}}}")
    if not report.plot_refs:
        lines.append(r"\item no plots were emitted")
    lines.append(r"\end{itemize}")
    lines.append(r"\end{document}")
    lines.append("")
    return "\n".join(lines)


def render_report(results, report_opt, out_dir, plot_refs=()):
    """Render the report file and its runtime bar chart.

    Sections in fixed order: Run Details, Run Times (table plus a bar
    chart scaled by the series maximum), Error Norms, Plots. Environment
    details are additionally embedded as comments at the top of the file.
    Returns the report path.
    """
    report_opt = report_opt or {}
    fmt = report_opt.get("format", "md")
    report = build_report(results, fmt, plot_refs)
    os.makedirs(out_dir, exist_ok=True)

    chart_name = "runtime.svg"
    ok_pairs = [(r.isotope, r.wall_time_s) for r in results.runs if r.status == "ok"]
    if ok_pairs:
        scaled = scale_runtimes([w for _, w in ok_pairs])
        scaled_map = dict(zip((label for label, _ in ok_pairs), scaled))
    else:
        scaled_map = {}
    bars = [(r.isotope, scaled_map.get(r.isotope)) for r in results.runs]
    _bar_chart(os.path.join(out_dir, chart_name),
               f"run times: {results.problem_id}", bars,
               "timings are scaled by the maximum in the series")

    if fmt == "md":
        content = _render_md(report, chart_name)
        path = os.path.join(out_dir, "report.md")
    else:
        content = _render_tex(report, chart_name)
        path = os.path.join(out_dir, "report.tex")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)
    return path
