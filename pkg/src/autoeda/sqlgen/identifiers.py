"""Tolerant SQL identifier extraction and the mechanical rewrite pass.

Not a grammar: strings and comments are skipped, function names are anything
followed by ``(``, and everything else word-like is a candidate identifier.
That is dialect-robust and sufficient for guarding generated SQL against
out-of-schema references and for enforcing qualification + backtick quoting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_TOKEN_RE = re.compile(
    r"""
      (?P<comment>--[^\n]*|/\*.*?\*/)
    | (?P<string>'(?:[^']|'')*')
    | (?P<btick>`[^`]*`)
    | (?P<dquote>"[^"]*")
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>\S)
    """,
    re.VERBOSE | re.DOTALL,
)

IDENT_KINDS = {"word", "btick", "dquote"}

KEYWORDS = {
    "ALL", "AND", "ANY", "AS", "ASC", "BETWEEN", "BY", "CASE", "CAST", "COLLATE",
    "CROSS", "CURRENT", "CURRENT_DATE", "CURRENT_TIME", "CURRENT_TIMESTAMP",
    "DELETE", "DESC", "DISTINCT", "ELSE", "END", "ESCAPE", "EXCEPT", "EXISTS",
    "EXPLAIN", "FALSE", "FILTER", "FIRST", "FOLLOWING", "FROM", "FULL", "GLOB",
    "GROUP", "HAVING", "IF", "IN", "INNER", "INSERT", "INTERSECT", "INTO", "IS",
    "ISNULL", "JOIN", "LAST", "LEFT", "LIKE", "LIMIT", "MATCH", "NATURAL", "NOT",
    "NOTNULL", "NULL", "NULLS", "OFFSET", "ON", "OR", "ORDER", "OUTER", "OVER",
    "PARTITION", "PLAN", "PRECEDING", "QUERY", "RANGE", "RECURSIVE", "REGEXP",
    "RIGHT", "ROW", "ROWS", "SELECT", "SET", "SOME", "THEN", "TRUE", "UNBOUNDED",
    "UNION", "UPDATE", "USING", "VALUES", "WHEN", "WHERE", "WINDOW", "WITH",
    # type names appear after CAST ... AS
    "BIGINT", "BLOB", "BOOLEAN", "CHAR", "CLOB", "DATE", "DATETIME", "DECIMAL",
    "DOUBLE", "FLOAT", "INT", "INTEGER", "INTERVAL", "NUMERIC", "REAL",
    "SMALLINT", "TEXT", "TIME", "TIMESTAMP", "TINYINT", "VARCHAR",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Reference:
    """One identifier occurrence; qualified references span ``qual.name``."""

    qualifier: str | None
    name: str
    start: int
    end: int
    is_alias_definition: bool = False


def _unquote(token: Token) -> str:
    if token.kind == "btick" or token.kind == "dquote":
        return token.text[1:-1]
    return token.text


def tokenize(sql: str) -> list[Token]:
    tokens = []
    for match in _TOKEN_RE.finditer(sql):
        kind = match.lastgroup
        if kind == "comment":
            continue
        tokens.append(Token(kind, match.group(), match.start(), match.end()))
    return tokens


def extract_references(sql: str, known_tables: set[str] | None = None):
    """Return (references, alias_definitions, table_aliases).

    ``alias_definitions`` are names introduced with AS; ``table_aliases`` maps
    alias -> table for bare aliases following a known table name.
    """
    tokens = tokenize(sql)
    known_tables = known_tables or set()
    references: list[Reference] = []
    alias_defs: set[str] = set()
    table_aliases: dict[str, str] = {}

    i = 0
    prev_was_as = False
    last_table: str | None = None  # ident just seen was a known table name
    while i < len(tokens):
        token = tokens[i]
        if token.kind not in IDENT_KINDS:
            prev_was_as = False
            last_table = None
            i += 1
            continue

        name = _unquote(token)
        upper = name.upper()
        nxt = tokens[i + 1] if i + 1 < len(tokens) else None

        if token.kind == "word" and nxt is not None and nxt.text == "(":
            # function call; never an identifier reference
            prev_was_as = False
            last_table = None
            i += 1
            continue

        if nxt is not None and nxt.text == ".":
            tail = tokens[i + 2] if i + 2 < len(tokens) else None
            if tail is not None and (tail.kind in IDENT_KINDS or tail.text == "*"):
                if tail.kind in IDENT_KINDS:
                    references.append(Reference(name, _unquote(tail), token.start, tail.end))
                else:
                    references.append(Reference(None, name, token.start, token.end))
                prev_was_as = False
                last_table = None
                i += 3
                continue

        if token.kind == "word" and upper in KEYWORDS:
            prev_was_as = upper == "AS"
            last_table = None
            i += 1
            continue

        if prev_was_as:
            alias_defs.add(name)
            references.append(Reference(None, name, token.start, token.end, is_alias_definition=True))
            last_table = None
        elif name in known_tables:
            references.append(Reference(None, name, token.start, token.end))
            last_table = name
        elif last_table is not None:
            # FROM users u / JOIN orders o style implicit table alias
            table_aliases[name] = last_table
            alias_defs.add(name)
            references.append(Reference(None, name, token.start, token.end, is_alias_definition=True))
            last_table = None
        else:
            references.append(Reference(None, name, token.start, token.end))
            last_table = None
        prev_was_as = False
        i += 1

    # AS-defined aliases directly after a table name also alias that table.
    for ref, follower in zip(references, references[1:]):
        if follower.is_alias_definition and ref.qualifier is None and ref.name in known_tables:
            table_aliases.setdefault(follower.name, ref.name)
    return references, alias_defs, table_aliases


def unresolved_references(
    sql: str, tables: dict[str, list[str]]
) -> list[str]:
    """Names in the SQL that resolve to nothing in ``tables`` (table -> columns)."""
    known_tables = set(tables)
    references, alias_defs, table_aliases = extract_references(sql, known_tables)
    all_columns = {c for cols in tables.values() for c in cols}
    problems = []
    for ref in references:
        if ref.is_alias_definition:
            continue
        if ref.qualifier is not None:
            owner = table_aliases.get(ref.qualifier, ref.qualifier)
            if owner not in known_tables:
                problems.append(f"{ref.qualifier}.{ref.name}")
            elif ref.name != "*" and ref.name not in tables[owner]:
                problems.append(f"{ref.qualifier}.{ref.name}")
            continue
        name = ref.name
        if name in known_tables or name in alias_defs or name in table_aliases:
            continue
        if name in all_columns:
            continue
        problems.append(name)
    return sorted(set(problems))


def rewrite_sql(sql: str, tables: dict[str, list[str]]) -> str:
    """Mechanical rewrite: backtick known identifiers, qualify columns on joins.

    Idempotent: quoting and qualification decisions depend only on resolved
    names, which quoting does not change.
    """
    known_tables = set(tables)
    references, alias_defs, table_aliases = extract_references(sql, known_tables)
    owners: dict[str, set[str]] = {}
    for table, columns in tables.items():
        for column in columns:
            owners.setdefault(column, set()).add(table)

    mentioned = {r.name for r in references if r.qualifier is None and r.name in known_tables}
    mentioned.update(table_aliases.values())
    qualify = len(mentioned) > 1

    replacements: list[tuple[int, int, str]] = []
    for ref in references:
        original = sql[ref.start : ref.end]
        if ref.qualifier is not None:
            owner = table_aliases.get(ref.qualifier, ref.qualifier)
            if owner in known_tables:
                if ref.name == "*":
                    replacement = f"`{ref.qualifier}`.*"
                else:
                    replacement = f"`{ref.qualifier}`.`{ref.name}`"
            else:
                continue
        elif ref.is_alias_definition or ref.name in alias_defs or ref.name in table_aliases:
            replacement = f"`{ref.name}`"
        elif ref.name in known_tables:
            replacement = f"`{ref.name}`"
        elif ref.name in owners:
            ref_owners = owners[ref.name] & (mentioned or set(owners[ref.name]))
            pool = ref_owners or owners[ref.name]
            if qualify and len(pool) == 1:
                replacement = f"`{next(iter(pool))}`.`{ref.name}`"
            else:
                replacement = f"`{ref.name}`"
        else:
            continue
        if replacement != original:
            replacements.append((ref.start, ref.end, replacement))

    for start, end, replacement in sorted(replacements, reverse=True):
        sql = sql[:start] + replacement + sql[end:]
    return sql
