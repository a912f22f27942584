"""Homepage usability audit engine.

Parses tag-soup HTML, evaluates a seventeen-rule usability guideline
catalog with N/V/R verdicts, scores pages by violation percentage, ingests
directory-catalog mirrors, and aggregates ranked site and category reports.
"""

from .doc_model import (
    Document,
    Element,
    parse_document,
    select_elements,
    serialize_document,
    serialize_element,
    text_content,
)
from .guidelines import (
    GATED_GUIDELINE_IDS,
    GUIDELINE_ORDER,
    GUIDELINES,
    GUIDELINES_BY_ID,
    Guideline,
    Verdict,
    VerdictVector,
    evaluate_page,
    run_guideline,
)
from .ingestion import (
    ErrorKind,
    FetchConfig,
    Fetched,
    FetchFailure,
    MirrorScan,
    SiteRecord,
    extract_directory_entries,
    fetch_homepage,
    fetch_many,
    registrable_domain,
    scan_directory_mirror,
)
from .reporting import (
    guideline_violation_rates,
    render_category_report,
    render_guideline_breakdown,
    render_site_report,
)
from .scoring import (
    CATALOG_CATEGORIES,
    CategorySummary,
    SiteEvaluation,
    assign_category,
    mean_of_category_averages,
    rank_sites,
    summarize_by_category,
    summarize_category,
    violation_percentage,
)
from .storage import Store, StoreError

__version__ = "0.1.0"

__all__ = [
    "CATALOG_CATEGORIES",
    "CategorySummary",
    "Document",
    "Element",
    "ErrorKind",
    "FetchConfig",
    "FetchFailure",
    "Fetched",
    "GATED_GUIDELINE_IDS",
    "GUIDELINES",
    "GUIDELINES_BY_ID",
    "GUIDELINE_ORDER",
    "Guideline",
    "MirrorScan",
    "SiteEvaluation",
    "SiteRecord",
    "Store",
    "StoreError",
    "Verdict",
    "VerdictVector",
    "assign_category",
    "evaluate_page",
    "extract_directory_entries",
    "fetch_homepage",
    "fetch_many",
    "guideline_violation_rates",
    "mean_of_category_averages",
    "parse_document",
    "rank_sites",
    "registrable_domain",
    "render_category_report",
    "render_guideline_breakdown",
    "render_site_report",
    "run_guideline",
    "scan_directory_mirror",
    "select_elements",
    "serialize_document",
    "serialize_element",
    "summarize_by_category",
    "summarize_category",
    "text_content",
    "violation_percentage",
]
