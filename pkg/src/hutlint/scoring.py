"""Per-page scoring and corpus aggregation.

A page's violation percentage is the round-half-up integer share of V
verdicts over all seventeen guidelines. Category averages divide the sum of
those percentages by *total* occurrences, errored sites included; that is
the published arithmetic, so a corrected average over evaluated sites is
carried alongside it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .guidelines import GUIDELINES, Verdict, VerdictVector
from .ingestion import ErrorKind, SiteRecord

GUIDELINE_COUNT = len(GUIDELINES)

# The fourteen top-level catalog categories sites are grouped under.
CATALOG_CATEGORIES: tuple[str, ...] = (
    "Arts_and_Entertainment",
    "Business_and_Economy",
    "Education",
    "Government",
    "Guides_and_Directories",
    "Health",
    "Maps_and_Views",
    "News_and_Media",
    "Recreation_and_Sports",
    "Science_and_Environment",
    "Society_and_Culture",
    "Transportation",
    "Travel_and_Tourism",
    "Weather",
)
UNCATEGORISED = "Uncategorised"

_CATEGORY_SET = frozenset(CATALOG_CATEGORIES)


def violation_percentage(vector: VerdictVector) -> int:
    """Integer 0..100: round-half-up of 100 * V-count / 17.

    N and R both count as non-violations and the denominator is always the
    full guideline count, applicability notwithstanding.
    """
    count_v = vector.count(Verdict.VIOLATE)
    return (200 * count_v + GUIDELINE_COUNT) // (2 * GUIDELINE_COUNT)


@dataclass(frozen=True)
class SiteEvaluation:
    """Outcome for one site: a verdict vector with its score, or an error."""

    site: SiteRecord
    vector: VerdictVector | None = None
    violation_pct: int | None = None
    error: ErrorKind | None = None

    def __post_init__(self) -> None:
        if (self.vector is None) == (self.error is None):
            raise ValueError("exactly one of vector or error must be set")
        if self.vector is not None and self.violation_pct is None:
            object.__setattr__(self, "violation_pct", violation_percentage(self.vector))
        if self.error is not None and self.violation_pct is not None:
            raise ValueError("errored sites carry no violation percentage")

    @property
    def is_error(self) -> bool:
        return self.error is not None

    @classmethod
    def evaluated(cls, site: SiteRecord, vector: VerdictVector) -> "SiteEvaluation":
        return cls(site=site, vector=vector)

    @classmethod
    def errored(cls, site: SiteRecord, kind: ErrorKind) -> "SiteEvaluation":
        return cls(site=site, error=kind)


def rank_sites(evaluations: Iterable[SiteEvaluation]) -> list[SiteEvaluation]:
    """Order evaluations for reporting.

    Evaluated sites first, by violation percentage descending with URL as
    the tie-break; errored sites follow, by URL.
    """
    evaluated = [e for e in evaluations if not e.is_error]
    errored = [e for e in evaluations if e.is_error]
    evaluated.sort(key=lambda e: (-e.violation_pct, e.site.url))
    errored.sort(key=lambda e: e.site.url)
    return evaluated + errored


@dataclass(frozen=True)
class CategorySummary:
    """Aggregated verdict statistics for one category."""

    category: str
    occurrences: int
    errors: int
    sum_violation_pct: int

    def __post_init__(self) -> None:
        if self.errors > self.occurrences:
            raise ValueError("errors cannot exceed occurrences")

    @property
    def evaluated(self) -> int:
        return self.occurrences - self.errors

    @property
    def avg_violation_pct(self) -> Fraction:
        """Sum of percentages over total occurrences (errored sites included)."""
        if self.occurrences == 0:
            return Fraction(0)
        return Fraction(self.sum_violation_pct, self.occurrences)

    @property
    def avg_over_evaluated(self) -> Fraction:
        """Corrected average that divides by evaluated sites only."""
        if self.evaluated == 0:
            return Fraction(0)
        return Fraction(self.sum_violation_pct, self.evaluated)


def summarize_category(category: str, evaluations: Sequence[SiteEvaluation]) -> CategorySummary:
    """Fold one category's site evaluations into its summary row."""
    errors = sum(1 for e in evaluations if e.is_error)
    total = sum(e.violation_pct for e in evaluations if not e.is_error)
    return CategorySummary(
        category=category,
        occurrences=len(evaluations),
        errors=errors,
        sum_violation_pct=total,
    )


def mean_of_category_averages(summaries: Sequence[CategorySummary]) -> Fraction:
    """Unweighted mean of the per-category averages."""
    if not summaries:
        raise ValueError("mean of zero categories is undefined")
    return sum((s.avg_violation_pct for s in summaries), Fraction(0)) / len(summaries)


def assign_category(category_path: str) -> str:
    """First path segment matching a known catalog category, else Uncategorised."""
    for segment in category_path.split("/"):
        if segment in _CATEGORY_SET:
            return segment
    return UNCATEGORISED


def summarize_by_category(evaluations: Iterable[SiteEvaluation]) -> list[CategorySummary]:
    """Group evaluations by their assigned category and summarize each."""
    groups: dict[str, list[SiteEvaluation]] = {}
    for evaluation in evaluations:
        groups.setdefault(assign_category(evaluation.site.category_path), []).append(evaluation)
    return [summarize_category(name, evals) for name, evals in groups.items()]
