"""Schema and result value objects shared by all database adapters."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    declared_type: str
    comment: str | None = None


@dataclass(frozen=True)
class TableMeta:
    name: str
    columns: tuple[ColumnMeta, ...]
    declared_keys: tuple[str, ...] = ()
    row_count_estimate: int = 0

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass(frozen=True)
class SchemaSnapshot:
    tables: tuple[TableMeta, ...]

    def table(self, name: str) -> TableMeta | None:
        for t in self.tables:
            if t.name == name:
                return t
        return None

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]

    def has_column(self, table: str, column: str) -> bool:
        meta = self.table(table)
        return meta is not None and column in meta.column_names()

    def to_json_dict(self) -> dict:
        return {
            "tables": [
                {
                    "name": t.name,
                    "columns": [
                        {"name": c.name, "declared_type": c.declared_type, "comment": c.comment}
                        for c in t.columns
                    ],
                    "declared_keys": list(t.declared_keys),
                    "row_count_estimate": t.row_count_estimate,
                }
                for t in self.tables
            ]
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SchemaSnapshot":
        tables = tuple(
            TableMeta(
                name=t["name"],
                columns=tuple(
                    ColumnMeta(c["name"], c["declared_type"], c.get("comment")) for c in t["columns"]
                ),
                declared_keys=tuple(t.get("declared_keys", [])),
                row_count_estimate=t.get("row_count_estimate", 0),
            )
            for t in data["tables"]
        )
        return cls(tables)


ERROR_CLASSES = ("unknown_relation", "unknown_column", "type_error", "syntax_error", "other")


@dataclass(frozen=True)
class ExplainOutcome:
    ok: bool
    plan_text: str = ""
    error_text: str = ""
    error_class: str = "other"


@dataclass(frozen=True)
class QueryResult:
    columns: tuple[tuple[str, str], ...]
    rows: tuple[tuple, ...]
    truncated: bool = False

    def column_names(self) -> list[str]:
        return [name for name, _ in self.columns]
