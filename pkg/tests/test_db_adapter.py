"""db-adapter contract: introspection, sampling, explain/execute, read-only guard."""

import pytest

from autoeda.db.base import (
    SQLITE_PATTERNS,
    classify_error,
    is_read_only,
    reservoir_sample,
    statement_kind,
)
from autoeda.db.factory import make_adapter
from autoeda.db.sqlite_adapter import SqliteAdapter
from autoeda.errors import ConnectionFailed, EngineError, NonReadOnlyStatement, UnknownTable


def test_introspect_lists_all_tables_with_comments(shop_adapter):
    snapshot = shop_adapter.introspect()
    assert snapshot.table_names() == ["orders", "products", "users"]
    users = snapshot.table("users")
    assert users.column_names() == ["id", "name", "email", "country", "created_at"]
    created = [c for c in users.columns if c.name == "created_at"][0]
    assert created.comment == "date format YYYY-mm-dd"
    assert users.declared_keys == ("id",)
    assert users.row_count_estimate == 4
    assert snapshot.table("orders").row_count_estimate == 6


def test_introspect_empty_database():
    adapter = SqliteAdapter(":memory:")
    assert adapter.introspect().tables == ()


def test_sample_rows_caps_at_population():
    adapter = SqliteAdapter(":memory:")
    adapter._conn.executescript(
        "CREATE TABLE tiny (a INTEGER); INSERT INTO tiny VALUES (1), (2);"
    )
    rows = adapter.sample_rows("tiny", 3, seed=7)
    assert sorted(rows) == [(1,), (2,)]


def test_sample_rows_deterministic_under_seed(shop_adapter):
    first = shop_adapter.sample_rows("orders", 3, seed=42)
    second = shop_adapter.sample_rows("orders", 3, seed=42)
    assert first == second
    assert len(first) == 3


def test_sample_rows_membership_over_large_table():
    adapter = SqliteAdapter(":memory:")
    adapter._conn.execute("CREATE TABLE big (n INTEGER)")
    adapter._conn.executemany("INSERT INTO big VALUES (?)", [(i,) for i in range(1000)])
    sample = adapter.sample_rows("big", 3, seed=5)
    assert len(sample) == 3
    assert len(set(sample)) == 3
    assert all(0 <= row[0] < 1000 for row in sample)


def test_sample_rows_unknown_table(shop_adapter):
    with pytest.raises(UnknownTable):
        shop_adapter.sample_rows("nope", 3)


def test_reservoir_sample_is_uniform_ish():
    counts = {i: 0 for i in range(10)}
    for seed in range(300):
        for value in reservoir_sample(range(10), 3, seed):
            counts[value] += 1
    assert min(counts.values()) > 0  # every element reachable


def test_explain_unknown_relation(shop_adapter):
    outcome = shop_adapter.explain("SELECT * FROM no_such_table")
    assert not outcome.ok
    assert outcome.error_class == "unknown_relation"
    assert "no_such_table" in outcome.error_text


def test_explain_unknown_column(shop_adapter):
    outcome = shop_adapter.explain("SELECT nonexistent FROM users")
    assert not outcome.ok
    assert outcome.error_class == "unknown_column"


def test_explain_syntax_error(shop_adapter):
    outcome = shop_adapter.explain("SELEC * FROM users")
    assert not outcome.ok
    assert outcome.error_class == "syntax_error"


def test_explain_valid_select_returns_plan(shop_adapter):
    outcome = shop_adapter.explain("SELECT id, name FROM users WHERE country = 'US'")
    assert outcome.ok
    assert outcome.plan_text
    assert outcome.error_text == ""


def test_explain_accepts_backticked_identifiers(shop_adapter):
    outcome = shop_adapter.explain("SELECT `users`.`name` FROM `users`")
    assert outcome.ok


def test_explain_never_changes_database_state(shop_adapter):
    before = shop_adapter.fingerprint()
    for sql in [
        "SELECT * FROM users",
        "SELECT * FROM missing_table",
        "SELEC broken",
        "DELETE FROM users",  # rejected by policy, still must not mutate
    ]:
        shop_adapter.explain(sql)
    assert shop_adapter.fingerprint() == before


def test_explain_rejects_non_select_as_data_not_failure(shop_adapter):
    outcome = shop_adapter.explain("DELETE FROM users")
    assert not outcome.ok
    assert "read-only" in outcome.error_text


def test_type_error_classification_on_real_engine_messages():
    # sqlite defers type misuse to execution; these are its real message texts.
    assert classify_error("datatype mismatch", SQLITE_PATTERNS) == "type_error"
    assert classify_error("integer overflow", SQLITE_PATTERNS) == "type_error"
    assert classify_error("malformed JSON", SQLITE_PATTERNS) == "type_error"
    # Engines that cast literals eagerly report it at prepare time instead.
    assert classify_error("invalid input syntax for integer: \"abc\"") == "type_error"
    assert classify_error("Incorrect integer value: 'abc' for column 'id'") == "type_error"
    assert classify_error("Conversion Error: Could not convert string 'abc'") == "type_error"
    assert classify_error("Table 'shop.userz' doesn't exist") == "unknown_relation"
    assert classify_error("Unknown column 'u.namex' in 'field list'") == "unknown_column"
    assert classify_error("something nobody patterns") == "other"


def test_execute_type_misuse_raises_classified_engine_error(shop_adapter):
    # EXPLAIN passes (sqlite compiles it), execution trips the type check.
    assert shop_adapter.explain("SELECT * FROM users LIMIT 'abc'").ok
    with pytest.raises(EngineError) as exc_info:
        shop_adapter.execute("SELECT * FROM users LIMIT 'abc'")
    assert exc_info.value.error_class == "type_error"
    assert "datatype mismatch" in exc_info.value.error_text


def test_execute_rejects_writes(shop_adapter):
    with pytest.raises(NonReadOnlyStatement):
        shop_adapter.execute("DELETE FROM orders")
    with pytest.raises(NonReadOnlyStatement):
        shop_adapter.execute("INSERT INTO users (id) VALUES (99)")
    with pytest.raises(NonReadOnlyStatement):
        shop_adapter.execute("SELECT 1; DROP TABLE users")


def test_execute_truncates_at_row_limit():
    adapter = SqliteAdapter(":memory:")
    adapter._conn.execute("CREATE TABLE ten (n INTEGER)")
    adapter._conn.executemany("INSERT INTO ten VALUES (?)", [(i,) for i in range(10)])
    result = adapter.execute("SELECT n FROM ten ORDER BY n", row_limit=5)
    assert len(result.rows) == 5
    assert result.truncated is True
    full = adapter.execute("SELECT n FROM ten", row_limit=100)
    assert full.truncated is False
    assert len(full.rows) == 10


def test_execute_runtime_failure_preserves_message(shop_adapter):
    # Compiles cleanly, fails only when rows flow (execution-refine territory).
    assert shop_adapter.explain("SELECT json_extract(name, '$') FROM users").ok
    with pytest.raises(EngineError) as exc_info:
        shop_adapter.execute("SELECT json_extract(name, '$') FROM users")
    assert "malformed JSON" in exc_info.value.error_text


def test_execute_returns_named_columns(shop_adapter):
    result = shop_adapter.execute("SELECT name, amount FROM orders JOIN users ON orders.user_id = users.id LIMIT 2")
    assert result.column_names() == ["name", "amount"]
    assert all(len(r) == 2 for r in result.rows)


def test_statement_kind_and_allowlist():
    assert statement_kind("  SELECT 1") == "SELECT"
    assert statement_kind("-- lead comment\nWITH t AS (SELECT 1) SELECT * FROM t") == "WITH"
    assert statement_kind("") == ""
    assert is_read_only("SELECT ';' AS tricky")  # semicolon inside a string literal
    assert is_read_only("WITH x AS (SELECT 1) SELECT * FROM x")
    assert is_read_only("EXPLAIN SELECT 1")
    assert not is_read_only("UPDATE t SET a = 1")
    assert not is_read_only("SELECT 1; SELECT 2")
    assert not is_read_only("PRAGMA journal_mode = DELETE")


def test_make_adapter_dispatch(tmp_path, shop_adapter):
    fixture_dir = tmp_path / "fx"
    fixture_dir.mkdir()
    (fixture_dir / "a.sql").write_text("CREATE TABLE z (a INTEGER); INSERT INTO z VALUES (1);")
    adapter = make_adapter(str(fixture_dir))
    assert adapter.introspect().table_names() == ["z"]
    with pytest.raises(ConnectionFailed):
        make_adapter("bogus://nowhere")
