"""Command-line pipeline driver.

Four resumable steps (ingest, fetch, evaluate, report) plus a single-page
check mode. Exit codes: 0 success, 1 usage error, 2 I/O or store failure,
3 missing prerequisite step.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .doc_model import parse_document
from .guidelines import GUIDELINES, evaluate_page
from .ingestion import (
    ErrorKind,
    FetchConfig,
    Fetched,
    SiteRecord,
    fetch_homepage,
    fetch_many,
    scan_directory_mirror,
)
from .reporting import (
    guideline_violation_rates,
    render_category_report,
    render_guideline_breakdown,
    render_site_report,
)
from .scoring import (
    SiteEvaluation,
    rank_sites,
    summarize_by_category,
    violation_percentage,
)
from .storage import (
    STATUS_FETCH_ERROR,
    STATUS_PENDING,
    Store,
    StoreError,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_PREREQUISITE = 3


@dataclass
class RunConfig:
    """Everything a pipeline step needs to know."""

    db_path: str | None = None
    mirror_root: str | None = None
    concurrency: int = 8
    timeout_secs: float = 30.0
    max_redirects: int = 5
    user_agent: str = "hutlint/1.0"
    politeness_delay_ms: int = 0
    eval_budget_secs: float = 10.0

    def fetch_config(self) -> FetchConfig:
        return FetchConfig(
            timeout_secs=self.timeout_secs,
            max_redirects=self.max_redirects,
            user_agent=self.user_agent,
            politeness_delay_ms=self.politeness_delay_ms,
        )


class PrerequisiteError(Exception):
    """A pipeline step was invoked before the step it depends on."""


# ---------------------------------------------------------------------------
# Step implementations (return counter dicts; CLI wrappers print them)
# ---------------------------------------------------------------------------


def run_ingest(cfg: RunConfig) -> dict[str, int]:
    """Scan the mirror and store records; counters for files/records/errors."""
    scan = scan_directory_mirror(cfg.mirror_root)
    with Store(cfg.db_path) as store:
        inserted = store.put_sites(scan.records)
    return {
        "scanned_files": scan.files_scanned,
        "records": inserted,
        "errors": scan.errors,
    }


def run_fetch(cfg: RunConfig) -> dict[str, int]:
    """Fetch source for every pending site; store bodies or error kinds."""
    with Store(cfg.db_path) as store:
        if store.site_count() == 0:
            raise PrerequisiteError("no sites in store; run ingest first")
        pending = store.sites_with_status(STATUS_PENDING, STATUS_FETCH_ERROR)
        results = fetch_many([url for _, url in pending], cfg.fetch_config(),
                             concurrency=cfg.concurrency)
        fetched = 0
        errors = 0
        for (site_id, _), result in zip(pending, results):
            store.put_source(site_id, result)
            if isinstance(result, Fetched):
                fetched += 1
            else:
                errors += 1
    return {"attempted": len(pending), "fetched": fetched, "errors": errors}


def run_evaluate(cfg: RunConfig) -> dict[str, int]:
    """Parse and judge every stored source that has no evaluation yet."""
    with Store(cfg.db_path) as store:
        if store.source_count() == 0:
            ran_fetch = bool(store.sites_with_status(STATUS_FETCH_ERROR))
            if not ran_fetch:
                raise PrerequisiteError("no sources in store; run fetch first")
        records = {row.record.id: row.record for row in store.query()}
        tested = 0
        errors = 0
        for site_id in store.sources_pending_evaluation():
            record = records[site_id]
            evaluation = _evaluate_one(store, site_id, record, cfg.eval_budget_secs)
            store.put_evaluation(site_id, evaluation)
            if evaluation.is_error:
                errors += 1
            else:
                tested += 1
    return {"tested": tested, "errors": errors}


def _evaluate_one(store: Store, site_id: int, record: SiteRecord,
                  budget_secs: float) -> SiteEvaluation:
    source = store.get_source(site_id)
    if source.body_truncated:
        return SiteEvaluation.errored(record, ErrorKind.EVALUATION_FAILED)
    started = time.monotonic()
    try:
        doc = parse_document(source.body)
        vector = evaluate_page(doc, base_url=source.final_url)
    except Exception:
        log.exception("evaluation blew up for %s", record.url)
        return SiteEvaluation.errored(record, ErrorKind.EVALUATION_FAILED)
    if time.monotonic() - started > budget_secs:
        return SiteEvaluation.errored(record, ErrorKind.EVALUATION_FAILED)
    return SiteEvaluation.evaluated(record, vector)


def collect_evaluations(store: Store, category_prefix: str | None = None,
                        min_pct: int | None = None,
                        status: str | None = None) -> list[SiteEvaluation]:
    """Site outcomes currently in the store, matching the filters."""
    out = []
    for row in store.query(category_prefix=category_prefix, min_pct=min_pct,
                           status=status):
        evaluation = row.to_evaluation()
        if evaluation is not None:
            out.append(evaluation)
    return out


# ---------------------------------------------------------------------------
# Command wrappers
# ---------------------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace) -> int:
    cfg = RunConfig(db_path=args.db, mirror_root=args.mirror_root)
    summary = run_ingest(cfg)
    print(f"scanned files: {summary['scanned_files']}")
    print(f"records: {summary['records']}, errors: {summary['errors']}")
    return EXIT_OK


def _cmd_fetch(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        db_path=args.db,
        concurrency=args.concurrency,
        timeout_secs=args.timeout_secs,
        max_redirects=args.max_redirects,
        user_agent=args.user_agent,
        politeness_delay_ms=args.politeness_delay_ms,
    )
    summary = run_fetch(cfg)
    print(f"attempted: {summary['attempted']}")
    print(f"fetched: {summary['fetched']}, errors: {summary['errors']}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = RunConfig(db_path=args.db, eval_budget_secs=args.eval_budget_secs)
    summary = run_evaluate(cfg)
    print(f"tested: {summary['tested']}, errors: {summary['errors']}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    with Store(args.db) as store:
        evaluations = collect_evaluations(
            store,
            category_prefix=args.category,
            min_pct=args.min_pct,
        )
        if args.which == "sites":
            ranked = rank_sites(evaluations)
            if args.limit is not None:
                ranked = ranked[:args.limit]
            data = render_site_report(ranked, format=args.format)
        elif args.per_guideline:
            data = render_guideline_breakdown(
                guideline_violation_rates(evaluations), format=args.format)
        else:
            summaries = summarize_by_category(evaluations)
            data = render_category_report(summaries, format=args.format)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    target = args.path_or_url
    if "://" in target:
        result = fetch_homepage(target, FetchConfig())
        if not isinstance(result, Fetched):
            print(f"fetch failed: {result.kind.value}: {result.detail}", file=sys.stderr)
            return EXIT_IO
        body = result.body
        base_url = args.base_url or result.final_url
    else:
        try:
            body = Path(target).read_bytes()
        except OSError as exc:
            print(f"cannot read {target}: {exc}", file=sys.stderr)
            return EXIT_IO
        base_url = args.base_url

    doc = parse_document(body)
    vector = evaluate_page(doc, base_url=base_url)
    pct = violation_percentage(vector)
    if args.format == "json":
        import json

        payload = {
            "guidelines": [
                {"id": g.id, "verdict": v.letter, "name": g.name,
                 "description": g.description}
                for g, v in zip(GUIDELINES, vector.verdicts)
            ],
            "violation_pct": pct,
        }
        print(json.dumps(payload, indent=2))
    else:
        for g, v in zip(GUIDELINES, vector.verdicts):
            print(f"{g.id} {v.letter} {g.name}: {g.description}")
        print(f"violation percentage: {pct}")
    return EXIT_OK


def _cmd_run_all(args: argparse.Namespace) -> int:
    _cmd_ingest(args)
    _cmd_fetch(args)
    _cmd_evaluate(args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # I/O failures, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_fetch_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--concurrency", type=int, default=8)
    parser.add_argument("--timeout-secs", type=float, default=30.0)
    parser.add_argument("--max-redirects", type=int, default=5)
    parser.add_argument("--user-agent", default="hutlint/1.0")
    parser.add_argument("--politeness-delay-ms", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="hutlint",
        description="Audit homepage usability: ingest a catalog mirror, "
                    "fetch homepages, evaluate guideline rules, report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="scan a directory mirror into the store")
    p.add_argument("--mirror-root", required=True)
    p.add_argument("--db", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("fetch", help="fetch homepage source for stored sites")
    p.add_argument("--db", required=True)
    _add_fetch_options(p)
    p.set_defaults(func=_cmd_fetch)

    p = sub.add_parser("evaluate", help="evaluate stored sources")
    p.add_argument("--db", required=True)
    p.add_argument("--eval-budget-secs", type=float, default=10.0)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="render site or category reports")
    p.add_argument("which", choices=("sites", "categories"))
    p.add_argument("--db", required=True)
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.add_argument("--category", default=None,
                   help="category path prefix filter")
    p.add_argument("--min-pct", type=int, default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--per-guideline", action="store_true",
                   help="emit per-guideline violation rates per category")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("check", help="evaluate a single page from a file or URL")
    p.add_argument("path_or_url")
    p.add_argument("--base-url", default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("run-all", help="ingest, fetch and evaluate in sequence")
    p.add_argument("--mirror-root", required=True)
    p.add_argument("--db", required=True)
    _add_fetch_options(p)
    p.add_argument("--eval-budget-secs", type=float, default=10.0)
    p.set_defaults(func=_cmd_run_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except PrerequisiteError as exc:
        print(f"hutlint: {exc}", file=sys.stderr)
        return EXIT_PREREQUISITE
    except (StoreError, OSError) as exc:
        print(f"hutlint: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
