"""Embedded store carrying the pipeline between steps.

Single-file SQLite database with three tables: sites (catalog records plus
pipeline status), sources (fetched bodies, zlib-compressed), evaluations
(verdict strings or error kinds). One writer at a time; readers are free.
"""
from __future__ import annotations

import sqlite3
import zlib
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .guidelines import Verdict, VerdictVector
from .ingestion import ErrorKind, FetchFailure, Fetched, FetchResult, SiteRecord
from .scoring import SiteEvaluation

SCHEMA_VERSION = 1

# Bodies beyond this many bytes are truncated and flagged; homepages larger
# than this are pathological and must not exhaust storage.
MAX_BODY_BYTES = 2 * 1024 * 1024

# Pipeline states a site moves through.
STATUS_PENDING = "pending"
STATUS_FETCHED = "fetched"
STATUS_FETCH_ERROR = "fetch_error"
STATUS_EVALUATED = "evaluated"
STATUS_EVAL_ERROR = "eval_error"

_ERROR_STATUSES = (STATUS_FETCH_ERROR, STATUS_EVAL_ERROR)


class StoreError(Exception):
    """Raised on storage misuse or an unusable database file."""


_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (
    key   TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sites (
    id            INTEGER PRIMARY KEY AUTOINCREMENT,
    url           TEXT NOT NULL,
    category_path TEXT NOT NULL,
    description   TEXT NOT NULL DEFAULT '',
    status        TEXT NOT NULL DEFAULT 'pending',
    error_kind    TEXT,
    UNIQUE (url, category_path)
);
CREATE TABLE IF NOT EXISTS sources (
    site_id        INTEGER PRIMARY KEY REFERENCES sites(id),
    fetched_at     TEXT NOT NULL,
    final_url      TEXT NOT NULL,
    http_status    INTEGER NOT NULL,
    body           BLOB NOT NULL,
    body_truncated INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS evaluations (
    site_id       INTEGER PRIMARY KEY REFERENCES sites(id),
    verdicts      TEXT,
    violation_pct INTEGER,
    error_kind    TEXT,
    CHECK (
        (verdicts IS NOT NULL AND violation_pct IS NOT NULL AND error_kind IS NULL)
        OR (verdicts IS NULL AND violation_pct IS NULL AND error_kind IS NOT NULL)
    ),
    CHECK (verdicts IS NULL OR length(verdicts) = 17)
);
"""


@dataclass(frozen=True)
class StoredSource:
    site_id: int
    fetched_at: str
    final_url: str
    http_status: int
    body: bytes
    body_truncated: bool


@dataclass(frozen=True)
class StoredSite:
    """One joined row: the catalog record plus its pipeline outcome so far."""

    record: SiteRecord
    status: str
    fetch_error: ErrorKind | None
    verdicts: str | None
    violation_pct: int | None
    eval_error: ErrorKind | None

    def to_evaluation(self) -> SiteEvaluation | None:
        """Collapse to a site outcome, or None while the pipeline is unfinished."""
        if self.verdicts is not None:
            return SiteEvaluation.evaluated(self.record, VerdictVector.from_letters(self.verdicts))
        if self.eval_error is not None:
            return SiteEvaluation.errored(self.record, self.eval_error)
        if self.fetch_error is not None:
            return SiteEvaluation.errored(self.record, self.fetch_error)
        return None


class Store:
    """Handle on one pipeline database file."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        try:
            self._conn = sqlite3.connect(self.path)
        except sqlite3.Error as exc:
            raise StoreError(f"cannot open store at {self.path}: {exc}") from exc
        self._conn.execute("PRAGMA foreign_keys = ON")
        try:
            self._init_schema()
        except sqlite3.Error as exc:
            self._conn.close()
            raise StoreError(f"cannot initialise store at {self.path}: {exc}") from exc

    def _init_schema(self) -> None:
        with self._conn:
            self._conn.executescript(_SCHEMA)
            row = self._conn.execute(
                "SELECT value FROM meta WHERE key = 'schema_version'"
            ).fetchone()
            if row is None:
                self._conn.execute(
                    "INSERT INTO meta (key, value) VALUES ('schema_version', ?)",
                    (str(SCHEMA_VERSION),),
                )
            elif int(row[0]) > SCHEMA_VERSION:
                raise StoreError(
                    f"store {self.path} has schema version {row[0]}, "
                    f"newer than supported {SCHEMA_VERSION}"
                )

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    @contextmanager
    def _write(self) -> Iterator[sqlite3.Connection]:
        try:
            with self._conn:
                yield self._conn
        except sqlite3.Error as exc:
            raise StoreError(str(exc)) from exc

    # -- sites ------------------------------------------------------------

    def put_sites(self, records: Sequence[SiteRecord]) -> int:
        """Upsert records keyed on (url, category_path); count fresh inserts.

        The batch is transactional: on any failure nothing is applied.
        """
        inserted = 0
        with self._write() as conn:
            for record in records:
                cur = conn.execute(
                    "INSERT INTO sites (url, category_path, description) "
                    "VALUES (?, ?, ?) "
                    "ON CONFLICT (url, category_path) DO NOTHING",
                    (record.url, record.category_path, record.description),
                )
                if cur.rowcount == 1:
                    inserted += 1
                else:
                    conn.execute(
                        "UPDATE sites SET description = ? "
                        "WHERE url = ? AND category_path = ?",
                        (record.description, record.url, record.category_path),
                    )
        return inserted

    def site_count(self) -> int:
        return self._conn.execute("SELECT count(*) FROM sites").fetchone()[0]

    def sites_with_status(self, *statuses: str) -> list[tuple[int, str]]:
        """(id, url) pairs for sites in any of the given states, id order."""
        marks = ",".join("?" for _ in statuses)
        rows = self._conn.execute(
            f"SELECT id, url FROM sites WHERE status IN ({marks}) ORDER BY id",
            statuses,
        ).fetchall()
        return [(row[0], row[1]) for row in rows]

    def _require_site(self, conn: sqlite3.Connection, site_id: int) -> None:
        if conn.execute("SELECT 1 FROM sites WHERE id = ?", (site_id,)).fetchone() is None:
            raise StoreError(f"unknown site id {site_id}")

    # -- sources -----------------------------------------------------------

    def put_source(self, site_id: int, result: FetchResult) -> None:
        """Record a fetch outcome, replacing any earlier one for the site."""
        with self._write() as conn:
            self._require_site(conn, site_id)
            if isinstance(result, Fetched):
                body = result.body
                truncated = len(body) > MAX_BODY_BYTES
                if truncated:
                    body = body[:MAX_BODY_BYTES]
                conn.execute(
                    "INSERT OR REPLACE INTO sources "
                    "(site_id, fetched_at, final_url, http_status, body, body_truncated) "
                    "VALUES (?, ?, ?, ?, ?, ?)",
                    (site_id, result.fetched_at, result.final_url,
                     result.http_status, zlib.compress(body), int(truncated)),
                )
                conn.execute(
                    "UPDATE sites SET status = ?, error_kind = NULL WHERE id = ?",
                    (STATUS_FETCHED, site_id),
                )
            elif isinstance(result, FetchFailure):
                conn.execute("DELETE FROM sources WHERE site_id = ?", (site_id,))
                conn.execute(
                    "UPDATE sites SET status = ?, error_kind = ? WHERE id = ?",
                    (STATUS_FETCH_ERROR, result.kind.value, site_id),
                )
            else:
                raise StoreError(f"not a fetch result: {result!r}")

    def get_source(self, site_id: int) -> StoredSource | None:
        row = self._conn.execute(
            "SELECT site_id, fetched_at, final_url, http_status, body, body_truncated "
            "FROM sources WHERE site_id = ?",
            (site_id,),
        ).fetchone()
        if row is None:
            return None
        return StoredSource(
            site_id=row[0], fetched_at=row[1], final_url=row[2],
            http_status=row[3], body=zlib.decompress(row[4]),
            body_truncated=bool(row[5]),
        )

    def sources_pending_evaluation(self) -> list[int]:
        """Site ids that have a stored source but no evaluation row yet."""
        rows = self._conn.execute(
            "SELECT s.site_id FROM sources s "
            "LEFT JOIN evaluations e ON e.site_id = s.site_id "
            "WHERE e.site_id IS NULL ORDER BY s.site_id"
        ).fetchall()
        return [row[0] for row in rows]

    def source_count(self) -> int:
        return self._conn.execute("SELECT count(*) FROM sources").fetchone()[0]

    # -- evaluations --------------------------------------------------------

    def put_evaluation(self, site_id: int, evaluation: SiteEvaluation) -> None:
        with self._write() as conn:
            self._require_site(conn, site_id)
            if evaluation.is_error:
                conn.execute(
                    "INSERT OR REPLACE INTO evaluations "
                    "(site_id, verdicts, violation_pct, error_kind) "
                    "VALUES (?, NULL, NULL, ?)",
                    (site_id, evaluation.error.value),
                )
                conn.execute(
                    "UPDATE sites SET status = ? WHERE id = ?",
                    (STATUS_EVAL_ERROR, site_id),
                )
            else:
                conn.execute(
                    "INSERT OR REPLACE INTO evaluations "
                    "(site_id, verdicts, violation_pct, error_kind) "
                    "VALUES (?, ?, ?, NULL)",
                    (site_id, evaluation.vector.letters(), evaluation.violation_pct),
                )
                conn.execute(
                    "UPDATE sites SET status = ? WHERE id = ?",
                    (STATUS_EVALUATED, site_id),
                )

    def evaluation_count(self) -> int:
        """Evaluations that produced a verdict vector (errors excluded)."""
        return self._conn.execute(
            "SELECT count(*) FROM evaluations WHERE verdicts IS NOT NULL"
        ).fetchone()[0]

    # -- joined queries ------------------------------------------------------

    def query(self, category_prefix: str | None = None, min_pct: int | None = None,
              status: str | None = None) -> list[StoredSite]:
        """Joined site rows matching every supplied filter.

        ``status`` accepts "evaluated" or "errored" (case-insensitive).
        """
        clauses: list[str] = []
        params: list = []
        if category_prefix is not None:
            escaped = (category_prefix.replace("\\", "\\\\")
                       .replace("%", "\\%").replace("_", "\\_"))
            clauses.append("sites.category_path LIKE ? ESCAPE '\\'")
            params.append(escaped + "%")
        if min_pct is not None:
            if not isinstance(min_pct, int) or isinstance(min_pct, bool):
                raise StoreError(f"min_pct must be an integer, got {min_pct!r}")
            clauses.append("e.violation_pct >= ?")
            params.append(min_pct)
        if status is not None:
            wanted = status.strip().lower()
            if wanted == "evaluated":
                clauses.append("e.verdicts IS NOT NULL")
            elif wanted == "errored":
                clauses.append("sites.status IN (?, ?)")
                params.extend(_ERROR_STATUSES)
            else:
                raise StoreError(f"unknown status filter {status!r}")
        sql = (
            "SELECT sites.id, sites.url, sites.category_path, sites.description, "
            "       sites.status, sites.error_kind, e.verdicts, e.violation_pct, e.error_kind "
            "FROM sites LEFT JOIN evaluations e ON e.site_id = sites.id"
        )
        if clauses:
            sql += " WHERE " + " AND ".join(clauses)
        sql += " ORDER BY sites.id"
        rows = self._conn.execute(sql, params).fetchall()
        out: list[StoredSite] = []
        for row in rows:
            record = SiteRecord(url=row[1], category_path=row[2],
                                description=row[3], id=row[0])
            out.append(StoredSite(
                record=record,
                status=row[4],
                fetch_error=ErrorKind(row[5]) if row[5] else None,
                verdicts=row[6],
                violation_pct=row[7],
                eval_error=ErrorKind(row[8]) if row[8] else None,
            ))
        return out
