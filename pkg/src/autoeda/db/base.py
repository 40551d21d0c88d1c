"""Adapter-shared machinery: read-only guard, error classification, sampling."""

from __future__ import annotations

import random
import re

# Engines word equivalent failures differently; the refinement chain only needs
# a coarse class plus the raw message, so classification is regex-over-message
# with an engine-specific table consulted before the generic one.
SQLITE_PATTERNS: list[tuple[str, str]] = [
    (r"no such table", "unknown_relation"),
    (r"no such view", "unknown_relation"),
    (r"no such column", "unknown_column"),
    (r"ambiguous column name", "unknown_column"),
    (r"syntax error", "syntax_error"),
    (r"incomplete input", "syntax_error"),
    (r"datatype mismatch", "type_error"),
    (r"integer overflow", "type_error"),
    (r"malformed JSON", "type_error"),
    (r"ESCAPE expression must be a single character", "type_error"),
]

GENERIC_PATTERNS: list[tuple[str, str]] = [
    (r"(relation|table) .* does not exist", "unknown_relation"),
    (r"Table '.*' doesn't exist", "unknown_relation"),
    (r"Unknown table", "unknown_relation"),
    (r"column .* does not exist", "unknown_column"),
    (r"Unknown column", "unknown_column"),
    (r"error in your SQL syntax", "syntax_error"),
    (r"syntax error", "syntax_error"),
    (r"invalid input syntax", "type_error"),
    (r"Incorrect \w+ value", "type_error"),
    (r"Truncated incorrect", "type_error"),
    (r"Conversion Error", "type_error"),
    (r"cannot be cast", "type_error"),
]


def classify_error(message: str, engine_patterns: list[tuple[str, str]] | None = None) -> str:
    """Map an engine error message onto a coarse error class."""
    for pattern, error_class in list(engine_patterns or []) + GENERIC_PATTERNS:
        if re.search(pattern, message, re.IGNORECASE):
            return error_class
    return "other"


_COMMENT_RE = re.compile(r"--[^\n]*|/\*.*?\*/", re.DOTALL)
_STRING_RE = re.compile(r"'(?:[^']|'')*'")


def strip_comments_and_strings(sql: str) -> str:
    """Blank out comments and string literals, preserving statement shape."""
    sql = _COMMENT_RE.sub(" ", sql)
    return _STRING_RE.sub("''", sql)


def statement_kind(sql: str) -> str:
    """First keyword of the statement, uppercased ('' when empty)."""
    stripped = strip_comments_and_strings(sql).strip()
    match = re.match(r"[A-Za-z]+", stripped)
    return match.group(0).upper() if match else ""

READ_ONLY_KINDS = {"SELECT", "WITH", "EXPLAIN", "VALUES"}

# Every statement keyword of the supported engines that is not read-only.
# An unknown first token is not denied: no engine can execute it, so it fails
# at prepare time with a real syntax error the refinement chain can consume.
WRITE_KINDS = {
    "ALTER", "ANALYZE", "ATTACH", "BEGIN", "CALL", "CHANGE", "CHECKPOINT",
    "CLOSE", "CLUSTER", "COMMENT", "COMMIT", "COPY", "CREATE", "DEALLOCATE",
    "DECLARE", "DELETE", "DESC", "DESCRIBE", "DETACH", "DISCARD", "DO",
    "DROP", "END", "EXECUTE", "FETCH", "FLUSH", "GRANT", "HANDLER", "IMPORT",
    "INSERT", "INSTALL", "KILL", "LOAD", "LOCK", "MERGE", "MOVE", "NOTIFY",
    "OPTIMIZE", "PRAGMA", "PREPARE", "PURGE", "REFRESH", "REINDEX", "RELEASE",
    "RENAME", "REPLACE", "RESET", "REVOKE", "ROLLBACK", "SAVEPOINT", "SET",
    "SHOW", "START", "STOP", "TRUNCATE", "UNINSTALL", "UNLOCK", "UPDATE",
    "UPSERT", "USE", "VACUUM", "XA",
}


def is_read_only(sql: str) -> bool:
    """Mutation guard: denies known write/admin statements and multi-statements."""
    body = strip_comments_and_strings(sql).strip().rstrip(";")
    if ";" in body:
        return False
    kind = statement_kind(sql)
    if not kind:
        return False
    return kind not in WRITE_KINDS


def reservoir_sample(iterable, n: int, seed: int | None = None) -> list:
    """Uniform sample of up to ``n`` items without materializing the source."""
    rng = random.Random(seed)
    sample: list = []
    for i, item in enumerate(iterable):
        if i < n:
            sample.append(item)
        else:
            j = rng.randint(0, i)
            if j < n:
                sample[j] = item
    return sample
