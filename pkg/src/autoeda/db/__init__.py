from .base import classify_error, is_read_only, statement_kind
from .factory import make_adapter
from .sqlite_adapter import SqliteAdapter
from .types import ColumnMeta, ExplainOutcome, QueryResult, SchemaSnapshot, TableMeta

__all__ = [
    "classify_error",
    "is_read_only",
    "statement_kind",
    "make_adapter",
    "SqliteAdapter",
    "ColumnMeta",
    "ExplainOutcome",
    "QueryResult",
    "SchemaSnapshot",
    "TableMeta",
]
