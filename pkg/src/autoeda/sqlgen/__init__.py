from .engine import SchemaSubset, SqlEngine
from .identifiers import extract_references, rewrite_sql, unresolved_references

__all__ = ["SchemaSubset", "SqlEngine", "extract_references", "rewrite_sql", "unresolved_references"]
