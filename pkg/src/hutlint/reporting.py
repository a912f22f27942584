"""Report rendering: ranked site tables and category summaries.

All renderers are pure functions from rows to bytes, deterministic for a
given input, so repeated runs over the same store diff clean.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Mapping, Sequence

from .guidelines import GUIDELINE_ORDER, Verdict
from .scoring import CategorySummary, SiteEvaluation, mean_of_category_averages

FORMATS = ("csv", "json", "text")

SITE_COLUMNS: tuple[str, ...] = ("web_site_address", "category_path",
                                 *GUIDELINE_ORDER, "pct_v")
CATEGORY_COLUMNS: tuple[str, ...] = (
    "category", "total_occurrences", "errors", "evaluated",
    "sum_violation_pct", "avg_violation_pct", "avg_over_evaluated",
)
MEAN_ROW_LABEL = "mean_of_category_averages"


def _site_cells(evaluation: SiteEvaluation) -> list[str]:
    if evaluation.is_error:
        letters = ["E"] * len(GUIDELINE_ORDER)
        pct = ""
    else:
        letters = [v.letter for v in evaluation.vector.verdicts]
        pct = str(evaluation.violation_pct)
    return [evaluation.site.url, evaluation.site.category_path, *letters, pct]


def render_site_report(evaluations: Sequence[SiteEvaluation], format: str = "csv") -> bytes:
    """Render the ranked per-site verdict table.

    Rows are emitted in the order given (rank upstream). Errored sites show
    E in every guideline column and an empty percentage.
    """
    rows = [_site_cells(e) for e in evaluations]
    if format == "csv":
        return _csv_bytes(SITE_COLUMNS, rows)
    if format == "json":
        payload = []
        for evaluation, cells in zip(evaluations, rows):
            entry: dict = {
                "web_site_address": evaluation.site.url,
                "category_path": evaluation.site.category_path,
                "verdicts": dict(zip(GUIDELINE_ORDER, cells[2:-1])),
                "pct_v": evaluation.violation_pct,
                "error": evaluation.error.value if evaluation.is_error else None,
            }
            payload.append(entry)
        return _json_bytes(payload)
    if format == "text":
        return _text_table(SITE_COLUMNS, rows)
    raise ValueError(f"unknown report format {format!r}")


def _category_cells(summary: CategorySummary) -> list[str]:
    return [
        summary.category,
        str(summary.occurrences),
        str(summary.errors),
        str(summary.evaluated),
        str(summary.sum_violation_pct),
        f"{float(summary.avg_violation_pct):.4f}",
        f"{float(summary.avg_over_evaluated):.4f}",
    ]


def render_category_report(summaries: Sequence[CategorySummary], format: str = "csv") -> bytes:
    """Render per-category aggregates, worst average first, plus the mean."""
    ordered = sorted(summaries, key=lambda s: (-s.avg_violation_pct, s.category))
    rows = [_category_cells(s) for s in ordered]
    mean = float(mean_of_category_averages(ordered)) if ordered else None
    if format == "csv":
        if mean is not None:
            rows.append([MEAN_ROW_LABEL, "", "", "", "", f"{mean:.2f}", ""])
        return _csv_bytes(CATEGORY_COLUMNS, rows)
    if format == "json":
        payload = {
            "categories": [
                {
                    "category": s.category,
                    "total_occurrences": s.occurrences,
                    "errors": s.errors,
                    "evaluated": s.evaluated,
                    "sum_violation_pct": s.sum_violation_pct,
                    "avg_violation_pct": round(float(s.avg_violation_pct), 4),
                    "avg_over_evaluated": round(float(s.avg_over_evaluated), 4),
                }
                for s in ordered
            ],
        }
        if mean is not None:
            payload["mean_of_category_averages"] = round(mean, 2)
        return _json_bytes(payload)
    if format == "text":
        out = _text_table(CATEGORY_COLUMNS, rows).decode("utf-8")
        if mean is not None:
            out += f"mean of category averages: {mean:.2f}\n"
        return out.encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def guideline_violation_rates(evaluations: Iterable[SiteEvaluation]) -> dict[str, dict[str, float]]:
    """Per category, the share (0..100) of evaluated sites violating each rule."""
    from .scoring import assign_category

    counts: dict[str, list[int]] = {}
    totals: dict[str, int] = {}
    for evaluation in evaluations:
        if evaluation.is_error:
            continue
        category = assign_category(evaluation.site.category_path)
        per_rule = counts.setdefault(category, [0] * len(GUIDELINE_ORDER))
        totals[category] = totals.get(category, 0) + 1
        for i, verdict in enumerate(evaluation.vector.verdicts):
            if verdict is Verdict.VIOLATE:
                per_rule[i] += 1
    rates: dict[str, dict[str, float]] = {}
    for category, per_rule in counts.items():
        total = totals[category]
        rates[category] = {
            gid: (100.0 * per_rule[i] / total if total else 0.0)
            for i, gid in enumerate(GUIDELINE_ORDER)
        }
    return rates


def render_guideline_breakdown(rates: Mapping[str, Mapping[str, float]],
                               format: str = "csv") -> bytes:
    """Render the per-category per-guideline violation-rate table."""
    columns = ("category", *GUIDELINE_ORDER)
    rows = [
        [category, *(f"{rates[category][gid]:.2f}" for gid in GUIDELINE_ORDER)]
        for category in sorted(rates)
    ]
    if format == "csv":
        return _csv_bytes(columns, rows)
    if format == "json":
        payload = {
            category: {gid: round(rates[category][gid], 2) for gid in GUIDELINE_ORDER}
            for category in sorted(rates)
        }
        return _json_bytes(payload)
    if format == "text":
        return _text_table(columns, rows)
    raise ValueError(f"unknown report format {format!r}")


def _csv_bytes(columns: Sequence[str], rows: Iterable[Sequence[str]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _text_table(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> bytes:
    widths = [len(c) for c in columns]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(str(c).ljust(widths[i]) for i, c in enumerate(columns)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(columns))),
    ]
    for row in rows:
        lines.append("  ".join(str(c).ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return ("\n".join(lines) + "\n").encode("utf-8")
