"""Plain-text rendering of evaluation output.

Each report is emitted twice in one stream: a fixed-width table for
humans (FNIR cells at four decimals, methods as rows and target FPIRs as
columns) and flat ``key = value`` lines for scripts, with floats at full
round-trip precision. The renderers are attribute-based, so they accept
both the in-memory dataclasses and the service payload models.
"""

from __future__ import annotations

import csv
import io


def _fmt(value: float) -> str:
    return repr(float(value))


def _bool(value: bool) -> str:
    return "true" if value else "false"


def render_report_table(reports) -> str:
    """Fixed-width FNIR table: one row per report, one column per target
    FPIR."""
    reports = list(reports)
    targets = [p.target_fpir for p in reports[0].operating_points]
    method_width = max(len("method"), *(len(r.method) for r in reports))
    headers = [f"FPIR={t:g}" for t in targets]
    widths = [max(len(h), 6) for h in headers]
    lines = ["FNIR by method and target FPIR"]
    lines.append(
        "  ".join(
            ["method".ljust(method_width)]
            + [h.rjust(w) for h, w in zip(headers, widths)]
        )
    )
    for report in reports:
        cells = [f"{p.fnir:.4f}".rjust(w) for p, w in zip(report.operating_points, widths)]
        lines.append("  ".join([report.method.ljust(method_width)] + cells))
    return "\n".join(lines) + "\n"


def report_keyvalues(report, prefix: str = "") -> list[str]:
    lines = [
        f"{prefix}method = {report.method}",
        f"{prefix}avg_gallery_size = {_fmt(report.avg_gallery_size)}",
        f"{prefix}num_mates = {report.num_mates}",
        f"{prefix}num_nonmates = {report.num_nonmates}",
        f"{prefix}precision = {_fmt(report.precision)}",
        f"{prefix}precision_defined = {_bool(report.precision_defined)}",
        f"{prefix}recall = {_fmt(report.recall)}",
    ]
    for point in report.operating_points:
        key = f"{point.target_fpir:g}"
        lines.append(f"{prefix}fnir@{key} = {_fmt(point.fnir)}")
        lines.append(f"{prefix}threshold@{key} = {_fmt(point.threshold)}")
        lines.append(f"{prefix}realized_fpir@{key} = {_fmt(point.realized_fpir)}")
    return lines


def render_report_text(report) -> str:
    """One report: the table plus its key=value block."""
    return render_report_table([report]) + "\n".join(report_keyvalues(report)) + "\n"


def render_sweep_text(rows) -> str:
    """Ranked sweep table (best FNIR first) plus per-row key=value
    lines."""
    rows = list(rows)
    targets = [p.target_fpir for p in rows[0].report.operating_points]
    first = f"{targets[0]:g}"
    header = ["rank", "pruning_ratio", "bandwidth", "radius", f"FNIR@{first}"]
    table = [header]
    for rank, row in enumerate(rows, start=1):
        table.append(
            [
                str(rank),
                "-" if row.pruning_ratio is None else f"{row.pruning_ratio:g}",
                "-" if row.bandwidth is None else f"{row.bandwidth:g}",
                f"{row.radius:g}",
                f"{row.report.operating_points[0].fnir:.4f}",
            ]
        )
    widths = [max(len(line[col]) for line in table) for col in range(len(header))]
    lines = ["sweep results by FNIR, best first"]
    for line in table:
        lines.append(
            "  ".join(
                cell.ljust(w) if col == 0 else cell.rjust(w)
                for col, (cell, w) in enumerate(zip(line, widths))
            )
        )
    for rank, row in enumerate(rows, start=1):
        prefix = f"result_{rank}."
        lines.append(f"{prefix}radius = {_fmt(row.radius)}")
        lines.append(
            f"{prefix}bandwidth = "
            + ("none" if row.bandwidth is None else _fmt(row.bandwidth))
        )
        lines.append(
            f"{prefix}pruning_ratio = "
            + ("none" if row.pruning_ratio is None else _fmt(row.pruning_ratio))
        )
        lines.extend(report_keyvalues(row.report, prefix))
    return "\n".join(lines) + "\n"


def render_identify_lines(results) -> str:
    """Per-probe CSV lines: probe_index,best_id,distance,accepted."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for r in results:
        writer.writerow(
            [r.probe_index, r.best_id, _fmt(r.best_distance), _bool(r.accepted)]
        )
    return buffer.getvalue()


def render_prune_lines(removed: dict[str, list[int]]) -> str:
    """Removed-vector report: identity,removed_index CSV lines in sorted
    identity order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for identity in sorted(removed):
        for index in removed[identity]:
            writer.writerow([identity, index])
    return buffer.getvalue()
