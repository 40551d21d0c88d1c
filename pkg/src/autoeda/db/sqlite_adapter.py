"""In-process adapter over sqlite3: deterministic tests and Spider-style DBs.

sqlite accepts backtick-quoted identifiers, raises unknown table/column and
syntax errors at prepare time (surfaced by EXPLAIN), and raises its
type-domain errors (datatype mismatch, integer overflow, malformed JSON) at
execution — the execute() path classifies those for the refinement chain.
"""

from __future__ import annotations

import hashlib
import re
import sqlite3
import threading
from pathlib import Path

from ..errors import ConnectionFailed, EngineError, NonReadOnlyStatement, UnknownTable
from .base import SQLITE_PATTERNS, classify_error, is_read_only, reservoir_sample
from .types import ColumnMeta, ExplainOutcome, QueryResult, SchemaSnapshot, TableMeta

# Column definition line with a trailing `-- comment` in the CREATE TABLE DDL.
_DDL_COMMENT_RE = re.compile(r'^\s*[`"\[]?(\w+)[`"\]]?\s[^\n]*?--\s*(.+?)\s*$')


class SqliteAdapter:
    """One connection guarded by a lock: a connection serves one task at a time."""

    dialect = "sqlite"

    def __init__(self, database: str | Path = ":memory:"):
        self.database = str(database)
        try:
            self._conn = sqlite3.connect(self.database, check_same_thread=False)
        except sqlite3.Error as exc:
            raise ConnectionFailed(f"cannot open sqlite database {database}: {exc}") from exc
        self._lock = threading.Lock()

    @classmethod
    def from_fixture(cls, sql_files: list[str | Path]) -> "SqliteAdapter":
        """Build an in-memory database from plain SQL fixture files (DDL + data)."""
        adapter = cls(":memory:")
        with adapter._lock:
            for path in sql_files:
                script = Path(path).read_text(encoding="utf-8")
                adapter._conn.executescript(script)
            adapter._conn.commit()
        return adapter

    @classmethod
    def from_fixture_dir(cls, directory: str | Path) -> "SqliteAdapter":
        files = sorted(Path(directory).glob("*.sql"))
        if not files:
            raise ConnectionFailed(f"no .sql fixture files under {directory}")
        return cls.from_fixture(files)

    def close(self) -> None:
        self._conn.close()

    # -- introspection -------------------------------------------------------

    def introspect(self) -> SchemaSnapshot:
        with self._lock:
            try:
                rows = self._conn.execute(
                    "SELECT name, sql FROM sqlite_master "
                    "WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name"
                ).fetchall()
            except sqlite3.Error as exc:
                raise ConnectionFailed(str(exc)) from exc
            tables = []
            for name, ddl in rows:
                comments = self._ddl_comments(ddl or "")
                columns = []
                keys = []
                for _, col_name, col_type, _notnull, _default, pk in self._conn.execute(
                    f"PRAGMA table_info({self._quote(name)})"
                ):
                    columns.append(ColumnMeta(col_name, col_type or "", comments.get(col_name)))
                    if pk:
                        keys.append(col_name)
                count = self._conn.execute(
                    f"SELECT COUNT(*) FROM {self._quote(name)}"
                ).fetchone()[0]
                tables.append(TableMeta(name, tuple(columns), tuple(keys), count))
        return SchemaSnapshot(tuple(tables))

    @staticmethod
    def _ddl_comments(ddl: str) -> dict[str, str]:
        comments: dict[str, str] = {}
        for line in ddl.splitlines():
            match = _DDL_COMMENT_RE.match(line)
            if match:
                comments[match.group(1)] = match.group(2)
        return comments

    @staticmethod
    def _quote(identifier: str) -> str:
        return '"' + identifier.replace('"', '""') + '"'

    # -- sampling ------------------------------------------------------------

    def sample_rows(self, table: str, n: int, seed: int | None = None) -> list[tuple]:
        if n < 1:
            raise ValueError("n must be >= 1")
        with self._lock:
            try:
                cursor = self._conn.execute(f"SELECT * FROM {self._quote(table)}")
            except sqlite3.Error as exc:
                raise UnknownTable(f"{table}: {exc}") from exc
            return reservoir_sample(cursor, n, seed)

    # -- explain / execute -----------------------------------------------------

    def explain(self, sql: str) -> ExplainOutcome:
        """Compile the statement without running it; classify prepare-time errors."""
        if not is_read_only(sql):
            return ExplainOutcome(
                ok=False,
                error_text="read-only policy: only SELECT statements are accepted",
                error_class="other",
            )
        statement = sql.strip().rstrip(";")
        if not statement.upper().startswith("EXPLAIN"):
            statement = f"EXPLAIN QUERY PLAN {statement}"
        with self._lock:
            try:
                rows = self._conn.execute(statement).fetchall()
            except sqlite3.Error as exc:
                message = str(exc)
                return ExplainOutcome(
                    ok=False,
                    error_text=message,
                    error_class=classify_error(message, SQLITE_PATTERNS),
                )
        plan = "\n".join(" ".join(str(v) for v in row) for row in rows) or "(empty plan)"
        return ExplainOutcome(ok=True, plan_text=plan)

    def execute(self, sql: str, row_limit: int = 1000) -> QueryResult:
        if not is_read_only(sql):
            raise NonReadOnlyStatement(
                f"statement kind not allowed (read-only SELECT policy): {sql[:80]!r}"
            )
        with self._lock:
            try:
                cursor = self._conn.execute(sql.strip().rstrip(";"))
                rows = cursor.fetchmany(row_limit + 1)
            except sqlite3.Error as exc:
                message = str(exc)
                raise EngineError(message, classify_error(message, SQLITE_PATTERNS)) from exc
            description = cursor.description or []
        truncated = len(rows) > row_limit
        columns = tuple((d[0], "") for d in description)
        return QueryResult(columns, tuple(tuple(r) for r in rows[:row_limit]), truncated)

    # -- test support ----------------------------------------------------------

    def fingerprint(self) -> str:
        """Stable hash of the full database content (schema + rows)."""
        with self._lock:
            dump = "\n".join(self._conn.iterdump())
        return hashlib.sha256(dump.encode("utf-8")).hexdigest()
