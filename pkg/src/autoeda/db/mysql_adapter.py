"""MySQL-compatible wire adapter for live deployments.

Requires the optional ``pymysql`` driver (``pip install autoeda[mysql]``).
All deterministic tests run on the in-process sqlite adapter instead.
"""

from __future__ import annotations

import threading
from urllib.parse import urlparse

from ..errors import ConnectionFailed, EngineError, NonReadOnlyStatement, UnknownTable
from .base import classify_error, is_read_only, reservoir_sample
from .types import ColumnMeta, ExplainOutcome, QueryResult, SchemaSnapshot, TableMeta

MYSQL_PATTERNS: list[tuple[str, str]] = [
    (r"Table '.*' doesn't exist", "unknown_relation"),
    (r"Unknown table", "unknown_relation"),
    (r"Unknown column", "unknown_column"),
    (r"error in your SQL syntax", "syntax_error"),
    (r"Incorrect \w+ value", "type_error"),
    (r"Truncated incorrect", "type_error"),
    (r"Out of range value", "type_error"),
]


class MySQLAdapter:
    dialect = "mysql"

    def __init__(self, url: str):
        try:
            import pymysql
        except ImportError as exc:
            raise ConnectionFailed(
                "the MySQL adapter needs the optional pymysql driver "
                "(pip install autoeda[mysql])"
            ) from exc
        parsed = urlparse(url)
        if not parsed.hostname or not parsed.path.lstrip("/"):
            raise ConnectionFailed(f"malformed mysql URL: {url!r}")
        self.schema = parsed.path.lstrip("/")
        try:
            self._conn = pymysql.connect(
                host=parsed.hostname,
                port=parsed.port or 3306,
                user=parsed.username or "",
                password=parsed.password or "",
                database=self.schema,
            )
        except Exception as exc:
            raise ConnectionFailed(f"cannot connect to {parsed.hostname}: {exc}") from exc
        self._lock = threading.Lock()

    def close(self) -> None:
        self._conn.close()

    def introspect(self) -> SchemaSnapshot:
        with self._lock, self._conn.cursor() as cur:
            cur.execute(
                "SELECT TABLE_NAME, TABLE_ROWS FROM information_schema.TABLES "
                "WHERE TABLE_SCHEMA = %s ORDER BY TABLE_NAME",
                (self.schema,),
            )
            table_rows = cur.fetchall()
            tables = []
            for table_name, row_estimate in table_rows:
                cur.execute(
                    "SELECT COLUMN_NAME, COLUMN_TYPE, COLUMN_COMMENT, COLUMN_KEY "
                    "FROM information_schema.COLUMNS "
                    "WHERE TABLE_SCHEMA = %s AND TABLE_NAME = %s ORDER BY ORDINAL_POSITION",
                    (self.schema, table_name),
                )
                columns = []
                keys = []
                for name, col_type, comment, key in cur.fetchall():
                    columns.append(ColumnMeta(name, col_type, comment or None))
                    if key == "PRI":
                        keys.append(name)
                tables.append(
                    TableMeta(table_name, tuple(columns), tuple(keys), int(row_estimate or 0))
                )
        return SchemaSnapshot(tuple(tables))

    def sample_rows(self, table: str, n: int, seed: int | None = None) -> list[tuple]:
        if n < 1:
            raise ValueError("n must be >= 1")
        with self._lock, self._conn.cursor() as cur:
            try:
                cur.execute(f"SELECT * FROM `{table}`")
            except Exception as exc:
                raise UnknownTable(f"{table}: {exc}") from exc
            return reservoir_sample(iter(cur.fetchall()), n, seed)

    def explain(self, sql: str) -> ExplainOutcome:
        if not is_read_only(sql):
            return ExplainOutcome(
                ok=False,
                error_text="read-only policy: only SELECT statements are accepted",
                error_class="other",
            )
        statement = sql.strip().rstrip(";")
        if not statement.upper().startswith("EXPLAIN"):
            statement = f"EXPLAIN {statement}"
        with self._lock, self._conn.cursor() as cur:
            try:
                cur.execute(statement)
                rows = cur.fetchall()
            except Exception as exc:
                message = str(exc)
                return ExplainOutcome(
                    ok=False,
                    error_text=message,
                    error_class=classify_error(message, MYSQL_PATTERNS),
                )
        plan = "\n".join(" ".join(str(v) for v in row) for row in rows)
        return ExplainOutcome(ok=True, plan_text=plan or "(empty plan)")

    def execute(self, sql: str, row_limit: int = 1000) -> QueryResult:
        if not is_read_only(sql):
            raise NonReadOnlyStatement(
                f"statement kind not allowed (read-only SELECT policy): {sql[:80]!r}"
            )
        with self._lock, self._conn.cursor() as cur:
            try:
                cur.execute(sql.strip().rstrip(";"))
                rows = cur.fetchmany(row_limit + 1)
            except Exception as exc:
                message = str(exc)
                raise EngineError(message, classify_error(message, MYSQL_PATTERNS)) from exc
            description = cur.description or []
        truncated = len(rows) > row_limit
        columns = tuple((d[0], "") for d in description)
        return QueryResult(columns, tuple(tuple(r) for r in rows[:row_limit]), truncated)
