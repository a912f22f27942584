"""Corpus ingestion: directory-mirror scanning and homepage fetching.

The mirror scanner walks an on-disk catalog copy (nested folders, each with
an index.html listing sites inside ``ul class="directory-url"`` markup) and
yields site records. The fetcher retrieves homepage source with a small,
closed error taxonomy so that every failure maps to a site-level error.
"""
from __future__ import annotations

import enum
import ipaddress
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence
from urllib.parse import urljoin, urlsplit

import requests

from .doc_model import Document, Element, collapse_whitespace, parse_document

log = logging.getLogger(__name__)

DIRECTORY_LIST_CLASS = "directory-url"


class ErrorKind(enum.Enum):
    """Why a site could not be evaluated. Every kind renders as level E."""

    REDIRECTED_OFF_SITE = "RedirectedOffSite"
    NETWORK_FAILURE = "NetworkFailure"
    TIMEOUT = "Timeout"
    SERVER_BLOCKED = "ServerBlocked"
    THREAT_FLAGGED = "ThreatFlagged"
    EVALUATION_FAILED = "EvaluationFailed"


@dataclass(frozen=True)
class SiteRecord:
    """One catalog entry: where the site lives and how it is categorized."""

    url: str
    category_path: str
    description: str = ""
    id: int | None = None

    def __post_init__(self) -> None:
        if not self.url or not _is_absolute_url(self.url):
            raise ValueError(f"site url must be absolute, got {self.url!r}")
        if not self.category_path:
            raise ValueError("category_path must be non-empty")


@dataclass(frozen=True)
class Fetched:
    body: bytes
    final_url: str
    http_status: int
    fetched_at: str


@dataclass(frozen=True)
class FetchFailure:
    kind: ErrorKind
    detail: str = ""


FetchResult = Fetched | FetchFailure


# Signature: (url, body) -> True when the content must be rejected as a
# threat. The default classifier never flags anything.
ThreatClassifier = Callable[[str, bytes], bool]


def never_flag(url: str, body: bytes) -> bool:
    return False


@dataclass
class FetchConfig:
    timeout_secs: float = 30.0
    max_redirects: int = 5
    user_agent: str = "hutlint/1.0"
    politeness_delay_ms: int = 0
    threat_classifier: ThreatClassifier = never_flag


def _is_absolute_url(url: str) -> bool:
    parts = urlsplit(url)
    return bool(parts.scheme) and bool(parts.netloc)


def registrable_domain(host: str) -> str:
    """Collapse a hostname to its registrable domain.

    Heuristic, not a full public-suffix lookup: IP addresses stand for
    themselves, known two-part suffixes (co.uk, com.au, ...) keep three
    labels, everything else keeps two.
    """
    host = host.strip().strip(".").lower()
    if not host:
        return host
    try:
        ipaddress.ip_address(host)
        return host
    except ValueError:
        pass
    labels = host.split(".")
    if len(labels) <= 2:
        return host
    if ".".join(labels[-2:]) in _TWO_PART_SUFFIXES:
        return ".".join(labels[-3:])
    return ".".join(labels[-2:])


_TWO_PART_SUFFIXES = frozenset({
    "co.uk", "org.uk", "ac.uk", "gov.uk", "me.uk", "net.uk",
    "co.jp", "ne.jp", "or.jp", "ac.jp", "go.jp",
    "com.au", "net.au", "org.au", "edu.au", "gov.au",
    "co.in", "net.in", "org.in", "ac.in", "gov.in", "nic.in", "res.in",
    "co.nz", "net.nz", "org.nz", "govt.nz",
    "com.sg", "edu.sg", "gov.sg",
    "com.my", "net.my", "org.my", "gov.my",
    "com.cn", "net.cn", "org.cn", "gov.cn", "edu.cn",
    "com.hk", "org.hk", "edu.hk", "gov.hk",
    "com.tw", "org.tw", "edu.tw", "gov.tw",
    "co.kr", "or.kr", "go.kr", "ac.kr", "ne.kr",
    "com.br", "org.br", "net.br",
    "com.np", "org.np", "edu.np", "gov.np", "net.np",
    "com.pk", "edu.pk", "gov.pk", "org.pk",
    "com.lk", "org.lk", "gov.lk", "edu.lk", "ac.lk",
    "com.bd", "edu.bd", "gov.bd",
    "co.th", "or.th", "go.th", "ac.th", "in.th",
    "com.vn", "edu.vn", "gov.vn", "org.vn",
    "com.ph", "org.ph", "gov.ph", "edu.ph",
    "com.tr", "org.tr", "edu.tr", "gov.tr",
    "com.sa", "org.sa", "edu.sa", "gov.sa",
    "co.il", "org.il", "ac.il", "gov.il",
    "com.eg", "edu.eg", "gov.eg",
    "co.za", "org.za", "web.za",
    "co.id", "or.id", "ac.id", "web.id", "go.id",
    "com.kh", "com.mm", "com.kw", "com.qa", "com.bh", "com.om",
    "com.jo", "com.lb", "com.mo", "com.mt", "com.mx", "com.ar",
})


# ---------------------------------------------------------------------------
# Step 1: directory mirror scanning
# ---------------------------------------------------------------------------


@dataclass
class MirrorScan:
    """Outcome of one mirror walk, with the step error counter."""

    records: list[SiteRecord] = field(default_factory=list)
    files_scanned: int = 0
    errors: int = 0
    failed_paths: list[str] = field(default_factory=list)


def extract_directory_entries(doc: Document, category_path: str) -> list[SiteRecord]:
    """Pull site records out of one parsed catalog page.

    Looks for ``ul`` lists whose class contains "directory-url"; each child
    ``li`` contributes its first anchor's href as the site URL and the
    remaining text as the description. Items without a usable anchor are
    skipped.
    """
    records: list[SiteRecord] = []
    for ul in doc.find_all("ul"):
        classes = (ul.get("class") or "").split()
        if DIRECTORY_LIST_CLASS not in classes:
            continue
        for li in ul.child_elements():
            if li.tag != "li":
                continue
            anchor = next((el for el in li.iter_elements() if el.tag == "a"), None)
            if anchor is None:
                continue
            href = (anchor.get("href") or "").strip()
            if not href or not _is_absolute_url(href):
                continue
            records.append(SiteRecord(
                url=href,
                category_path=category_path,
                description=_entry_description(li, anchor),
            ))
    return records


def _entry_description(li: Element, anchor: Element) -> str:
    """Text of the list item minus the anchor's own label."""
    parts: list[str] = []
    stack: list[Element | str] = [c for c in reversed(li.children)]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
            continue
        if node is anchor:
            continue
        stack.extend(reversed(node.children))
    return collapse_whitespace("".join(parts))


def scan_directory_mirror(root: str | Path) -> MirrorScan:
    """Walk a catalog mirror and collect de-duplicated site records.

    The category path of a record is the directory path of its index.html
    relative to the mirror root. Unreadable files are skipped and counted;
    an unusable root raises.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"mirror root is not a readable directory: {root}")

    scan = MirrorScan()
    seen: set[tuple[str, str]] = set()
    for index_path in sorted(root.rglob("index.html")):
        scan.files_scanned += 1
        try:
            data = index_path.read_bytes()
        except OSError as exc:
            log.warning("skipping unreadable catalog file %s: %s", index_path, exc)
            scan.errors += 1
            scan.failed_paths.append(str(index_path))
            continue
        rel = index_path.parent.relative_to(root).as_posix()
        category_path = rel if rel else "."
        for record in extract_directory_entries(parse_document(data), category_path):
            key = (record.url, record.category_path)
            if key in seen:
                continue
            seen.add(key)
            scan.records.append(record)
    return scan


# ---------------------------------------------------------------------------
# Step 2: homepage fetching
# ---------------------------------------------------------------------------


def fetch_homepage(url: str, cfg: FetchConfig | None = None,
                   session: requests.Session | None = None) -> FetchResult:
    """GET one homepage, following same-domain redirects only.

    Never raises: every failure comes back as a FetchFailure whose kind is
    one of the closed error taxonomy. At most ``max_redirects + 1`` requests
    are issued.
    """
    cfg = cfg or FetchConfig()
    own_session = session is None
    sess = session or requests.Session()
    headers = {"User-Agent": cfg.user_agent, "Accept": "text/html"}
    origin = registrable_domain(urlsplit(url).hostname or "")
    current = url
    try:
        for _ in range(cfg.max_redirects + 1):
            try:
                resp = sess.get(current, headers=headers, timeout=cfg.timeout_secs,
                                allow_redirects=False)
            except requests.Timeout:
                return FetchFailure(ErrorKind.TIMEOUT, f"no response within {cfg.timeout_secs}s")
            except requests.RequestException as exc:
                return FetchFailure(ErrorKind.NETWORK_FAILURE, str(exc))

            status = resp.status_code
            if 300 <= status < 400:
                location = resp.headers.get("Location")
                if not location:
                    return FetchFailure(ErrorKind.NETWORK_FAILURE,
                                        f"redirect {status} without location")
                target = urljoin(current, location)
                target_domain = registrable_domain(urlsplit(target).hostname or "")
                if target_domain != origin:
                    return FetchFailure(ErrorKind.REDIRECTED_OFF_SITE,
                                        f"{url} -> {target}")
                current = target
                continue
            if status in (403, 429):
                return FetchFailure(ErrorKind.SERVER_BLOCKED, f"status {status}")
            if 200 <= status < 300:
                body = resp.content
                if cfg.threat_classifier(url, body):
                    return FetchFailure(ErrorKind.THREAT_FLAGGED, url)
                return Fetched(
                    body=body,
                    final_url=current,
                    http_status=status,
                    fetched_at=datetime.now(timezone.utc).isoformat(),
                )
            return FetchFailure(ErrorKind.NETWORK_FAILURE, f"status {status}")
        return FetchFailure(ErrorKind.NETWORK_FAILURE,
                            f"more than {cfg.max_redirects} redirects")
    finally:
        if own_session:
            sess.close()


class _HostThrottle:
    """Serializes requests per host and enforces the politeness gap."""

    def __init__(self, delay_ms: int) -> None:
        self._delay = delay_ms / 1000.0
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._last: dict[str, float] = {}

    def _lock_for(self, host: str) -> threading.Lock:
        with self._guard:
            if host not in self._locks:
                self._locks[host] = threading.Lock()
            return self._locks[host]

    def run(self, host: str, fn: Callable[[], FetchResult]) -> FetchResult:
        with self._lock_for(host):
            if self._delay > 0:
                since = time.monotonic() - self._last.get(host, 0.0)
                if since < self._delay:
                    time.sleep(self._delay - since)
            try:
                return fn()
            finally:
                self._last[host] = time.monotonic()


def fetch_many(urls: Sequence[str], cfg: FetchConfig | None = None,
               concurrency: int = 8) -> list[FetchResult]:
    """Fetch many homepages with a bounded pool, one in-flight per host."""
    cfg = cfg or FetchConfig()
    throttle = _HostThrottle(cfg.politeness_delay_ms)
    results: list[FetchResult | None] = [None] * len(urls)

    def work(i: int, url: str) -> None:
        host = urlsplit(url).hostname or ""
        results[i] = throttle.run(host, lambda: fetch_homepage(url, cfg))

    if not urls:
        return []
    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        futures = [pool.submit(work, i, url) for i, url in enumerate(urls)]
        for fut in futures:
            fut.result()
    return [r for r in results if r is not None]
