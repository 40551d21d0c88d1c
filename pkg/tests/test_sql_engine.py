"""Schema filtering, generation + rewrite, and the self-refinement chain."""

import json

import pytest

from autoeda.domain import ClarifiedTask, PipelineConfig, Subtask, DecompositionPlan, validate
from autoeda.errors import EmptySubset, NonReadOnlyStatement, OutOfSubsetReference, RefinementExhausted
from autoeda.llm.providers import ScriptedRule
from autoeda.sqlgen.engine import SchemaSubset, SqlEngine
from autoeda.sqlgen.identifiers import rewrite_sql, unresolved_references
from autoeda.vectors.embedding import StubEmbedder
from autoeda.vectors.index import VectorIndex

import shop_script
from conftest import scripted_gateway


def task_for(refined, detail="", question=None):
    return ClarifiedTask(
        original_question=question or refined,
        main_concepts=(),
        ambiguities=(),
        refined_task=refined,
        detailed_description=detail,
    )


def seeded_index(tables=("users", "orders", "products")):
    index = VectorIndex(StubEmbedder(dim=32))
    for name, profile in shop_script.TABLE_PROFILES.items():
        if name not in tables:
            continue
        index.add("table_desc", name, shop_script.TABLE_REDUCE_REPLIES[name], {"table": name})
        for column, description in shop_script.COLUMN_REPLIES[name].items():
            index.add(
                "column_desc",
                f"{name}.{column}",
                description,
                {"table": name, "column": column},
            )
    return index


def make_engine(shop_adapter, rules=None, default=None, config=None, index=None):
    gateway = scripted_gateway(rules or [], strict=default is None, default=default)
    return SqlEngine(
        gateway,
        index if index is not None else seeded_index(),
        shop_adapter,
        shop_adapter.introspect(),
        config or PipelineConfig(),
    )


SUBSET_TWO_TABLES = SchemaSubset(
    (("orders", ("id", "user_id", "amount", "status")), ("users", ("id", "name", "country")))
)


# -- identifier machinery --------------------------------------------------------


MAPPING = {"orders": ["id", "user_id", "amount", "status"], "users": ["id", "name", "country"]}


def test_unresolved_accepts_known_tables_columns_aliases_functions():
    sql = (
        "SELECT u.name, COUNT(orders.id) AS order_count FROM orders "
        "JOIN users u ON orders.user_id = u.id WHERE status = 'paid' "
        "GROUP BY u.name ORDER BY order_count DESC"
    )
    assert unresolved_references(sql, MAPPING) == []


def test_unresolved_flags_unknown_names():
    assert unresolved_references("SELECT shipment FROM orders", MAPPING) == ["shipment"]
    assert unresolved_references("SELECT * FROM warehouses", MAPPING) == ["warehouses"]
    assert unresolved_references("SELECT orders.ghost FROM orders", MAPPING) == ["orders.ghost"]
    # unknown alias qualifier is reported; x2 is an implicit alias of orders
    assert unresolved_references("SELECT x.id FROM orders x2", MAPPING) == ["x.id"]
    assert "z.id" in unresolved_references("SELECT z.id FROM orders", MAPPING)


def test_unresolved_ignores_strings_numbers_and_cast_types():
    sql = "SELECT CAST(amount AS INTEGER) FROM orders WHERE status = 'name' LIMIT 5"
    assert unresolved_references(sql, MAPPING) == []


def test_rewrite_qualifies_and_backticks_multi_table_sql():
    sql = (
        "SELECT users.name, COUNT(orders.id) AS order_count FROM orders "
        "JOIN users ON orders.user_id = users.id GROUP BY users.name"
    )
    rewritten = rewrite_sql(sql, MAPPING)
    assert rewritten == (
        "SELECT `users`.`name`, COUNT(`orders`.`id`) AS `order_count` FROM `orders` "
        "JOIN `users` ON `orders`.`user_id` = `users`.`id` GROUP BY `users`.`name`"
    )


def test_rewrite_qualifies_bare_columns_when_two_tables_present():
    sql = "SELECT name, amount FROM orders JOIN users ON orders.user_id = users.id"
    rewritten = rewrite_sql(sql, MAPPING)
    assert "`users`.`name`" in rewritten
    assert "`orders`.`amount`" in rewritten


def test_rewrite_single_table_backticks_without_qualification():
    sql = "SELECT status, SUM(amount) AS total FROM orders GROUP BY status"
    rewritten = rewrite_sql(sql, {"orders": MAPPING["orders"]})
    assert rewritten == (
        "SELECT `status`, SUM(`amount`) AS `total` FROM `orders` GROUP BY `status`"
    )


def test_rewrite_preserves_table_aliases():
    sql = "SELECT u.name FROM users u WHERE u.country = 'US'"
    rewritten = rewrite_sql(sql, MAPPING)
    assert "`u`.`name`" in rewritten
    assert "FROM `users` `u`" in rewritten


@pytest.mark.parametrize(
    "sql",
    [
        "SELECT status, SUM(amount) AS total FROM orders GROUP BY status",
        "SELECT users.name, COUNT(orders.id) AS c FROM orders JOIN users ON orders.user_id = users.id GROUP BY users.name",
        "SELECT u.name FROM users u ORDER BY u.name",
        "SELECT name FROM users WHERE country = 'DE' LIMIT 3",
    ],
)
def test_rewrite_is_idempotent(sql):
    once = rewrite_sql(sql, MAPPING)
    twice = rewrite_sql(once, MAPPING)
    assert once == twice


# -- schema filtering ----------------------------------------------------------------


def test_reduce_dedupes_preserving_first_seen_order(shop_adapter):
    reply = json.dumps(
        [
            {"table": "orders", "columns": ["amount"]},
            {"table": "orders", "columns": ["amount"]},
            {"table": "users", "columns": ["name"]},
        ]
    )
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SCHEMA-FILTER", reply)])
    subset = engine.filter_schema(task_for("total amount per user"))
    assert subset.entries == (("orders", ("amount",)), ("users", ("name",)))


def test_dedupe_across_multiple_blocks(shop_adapter):
    # A tiny budget forces one candidate table per map block.
    config = PipelineConfig(max_prompt_tokens=80)
    replies = {
        "block=0": [{"table": "orders", "columns": ["amount"]}],
        "block=1": [{"table": "orders", "columns": ["amount", "status"]}],
        "block=2": [{"table": "users", "columns": ["name"]}],
    }

    def responder(prompt):
        for marker, reply in replies.items():
            if f"### SCHEMA-FILTER {marker}" in prompt:
                return json.dumps(reply)
        raise AssertionError(prompt[:80])

    engine = make_engine(shop_adapter, default=responder, config=config)
    subset = engine.filter_schema(task_for("orders per user"))
    assert subset.entries[0] == ("orders", ("amount", "status"))
    assert ("users", ("name",)) in subset.entries


def test_single_table_database_subset(shop_adapter):
    index = seeded_index(tables=("orders",))
    reply = json.dumps([{"table": "orders", "columns": ["amount", "status"]}])
    engine = make_engine(
        shop_adapter, rules=[ScriptedRule("### SCHEMA-FILTER", reply)], index=index
    )
    subset = engine.filter_schema(task_for("total amount"))
    assert subset.tables() == ["orders"]


def test_fixture_question_selects_expected_subset(shop_adapter):
    engine = make_engine(shop_adapter, rules=shop_script.question_rules())
    refined = shop_script.QUESTIONS[1]["clarify"]["refined_task"]
    subset = engine.filter_schema(task_for(refined))
    assert subset.entries == (
        ("orders", ("id", "user_id")),
        ("users", ("id", "name")),
    )


def test_empty_namespace_raises_empty_subset(shop_adapter):
    engine = make_engine(
        shop_adapter, rules=[], index=VectorIndex(StubEmbedder(dim=32))
    )
    with pytest.raises(EmptySubset):
        engine.filter_schema(task_for("anything"))


def test_filter_rejecting_everything_raises_empty_subset(shop_adapter):
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SCHEMA-FILTER", "[]")])
    with pytest.raises(EmptySubset):
        engine.filter_schema(task_for("irrelevant question"))


def test_hallucinated_tables_and_columns_are_dropped(shop_adapter):
    reply = json.dumps(
        [
            {"table": "ghosts", "columns": ["x"]},
            {"table": "orders", "columns": ["amount", "phantom"]},
        ]
    )
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SCHEMA-FILTER", reply)])
    subset = engine.filter_schema(task_for("q"))
    assert subset.entries == (("orders", ("amount",)),)


# -- SQL generation ---------------------------------------------------------------------


def test_generate_two_table_join_fully_qualified(shop_adapter):
    sql_reply = shop_script.QUESTIONS[1]["sql"]
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SQL-GENERATE", sql_reply)])
    refined = shop_script.QUESTIONS[1]["clarify"]["refined_task"]
    sql = engine.generate_sql(task_for(refined), SUBSET_TWO_TABLES)
    assert "`orders`.`user_id`" in sql
    assert "`users`.`name`" in sql
    assert sql.count("`") >= 16
    result = shop_adapter.execute(sql)
    assert len(result.rows) > 0


def test_generate_empty_output_means_not_answerable(shop_adapter):
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SQL-GENERATE", "")])
    sql = engine.generate_sql(task_for("unanswerable"), SUBSET_TWO_TABLES)
    assert sql == ""


def test_out_of_subset_reference_triggers_corrective_reprompt(shop_adapter):
    rules = [
        ScriptedRule("### SQL-GENERATE-RETRY", "SELECT amount FROM orders"),
        ScriptedRule("### SQL-GENERATE", "SELECT shipment_code FROM orders"),
    ]
    engine = make_engine(shop_adapter, rules=rules)
    sql = engine.generate_sql(task_for("amounts"), SUBSET_TWO_TABLES)
    assert "`amount`" in sql
    assert engine.gateway.counters("sql.generate").calls == 2


def test_out_of_subset_reference_fails_after_retry(shop_adapter):
    rules = [
        ScriptedRule("### SQL-GENERATE-RETRY", "SELECT still_wrong FROM orders"),
        ScriptedRule("### SQL-GENERATE", "SELECT shipment_code FROM orders"),
    ]
    engine = make_engine(shop_adapter, rules=rules)
    with pytest.raises(OutOfSubsetReference):
        engine.generate_sql(task_for("amounts"), SUBSET_TWO_TABLES)


def test_generated_write_statement_is_rejected(shop_adapter):
    engine = make_engine(
        shop_adapter, rules=[ScriptedRule("### SQL-GENERATE", "DELETE FROM orders")]
    )
    with pytest.raises((NonReadOnlyStatement, OutOfSubsetReference)):
        engine.generate_sql(task_for("remove data"), SUBSET_TWO_TABLES)


def test_code_fences_are_stripped(shop_adapter):
    fenced = "```sql\nSELECT amount FROM orders\n```"
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SQL-GENERATE", fenced)])
    sql = engine.generate_sql(task_for("amounts"), SUBSET_TWO_TABLES)
    assert sql == "SELECT `amount` FROM `orders`"


# -- refinement chain ----------------------------------------------------------------------


def test_bad_column_fixed_in_one_round(shop_adapter):
    fix = "SELECT `name` FROM `users`"
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SQL-REPAIR stage=explain", fix)])
    artifact = engine.refine_chain(task_for("names"), "SELECT nam FROM users")
    assert artifact.status == "executed"
    assert artifact.sql == fix
    assert len(artifact.refinement_trace) == 1
    entry = artifact.refinement_trace[0]
    assert entry.round == 1 and entry.stage == "explain"
    assert "no such column" in entry.error_text
    assert validate(artifact) == []


def test_valid_sql_needs_zero_rounds(shop_adapter):
    engine = make_engine(shop_adapter, rules=[])
    artifact = engine.refine_chain(task_for("names"), "SELECT name FROM users")
    assert artifact.status == "executed"
    assert artifact.refinement_trace == ()
    assert artifact.result_preview is not None
    assert len(artifact.result_preview.rows) == 4


def test_never_fixing_repair_exhausts_rounds(shop_adapter):
    engine = make_engine(
        shop_adapter,
        rules=[ScriptedRule("### SQL-REPAIR", "SELECT still_missing FROM users")],
        config=PipelineConfig(max_refine_rounds=3),
    )
    with pytest.raises(RefinementExhausted) as exc_info:
        engine.refine_chain(task_for("q"), "SELECT ghost FROM users")
    trace = exc_info.value.trace
    assert len(trace) <= 2 * 3
    rounds = [entry.round for entry in trace]
    assert rounds == sorted(rounds) and len(set(rounds)) == len(rounds)
    assert max(rounds) <= 3
    assert exc_info.value.final_error


def test_execute_stage_failure_is_repaired(shop_adapter):
    # EXPLAIN passes; execution hits the engine's type check, repair follows.
    fix = "SELECT * FROM `users` LIMIT 2"
    engine = make_engine(shop_adapter, rules=[ScriptedRule("### SQL-REPAIR stage=execute", fix)])
    artifact = engine.refine_chain(task_for("q"), "SELECT * FROM users LIMIT 'abc'")
    assert artifact.status == "executed"
    assert artifact.refinement_trace[0].stage == "execute"
    assert "datatype mismatch" in artifact.refinement_trace[0].error_text


def test_preview_rows_are_bounded(shop_adapter):
    adapter = shop_adapter
    adapter._conn.execute("CREATE TABLE wide_rows (n INTEGER)")
    adapter._conn.executemany("INSERT INTO wide_rows VALUES (?)", [(i,) for i in range(50)])
    engine = make_engine(adapter, rules=[])
    artifact = engine.refine_chain(task_for("q"), "SELECT n FROM wide_rows")
    assert len(artifact.result_preview.rows) <= 20


# -- plan execution ---------------------------------------------------------------------------


def plan_for(engine, single=True, subtasks=()):
    parent = task_for("parent task", question="parent?")
    return DecompositionPlan(parent=parent, single_sql_answerable=single, subtasks=tuple(subtasks))


def test_single_sql_plan_yields_one_artifact(shop_adapter):
    rules = [
        ScriptedRule("### SCHEMA-FILTER", json.dumps([{"table": "users", "columns": ["name"]}])),
        ScriptedRule("### SQL-GENERATE", "SELECT name FROM users"),
    ]
    engine = make_engine(shop_adapter, rules=rules)
    artifacts = engine.run_subtasks(plan_for(engine))
    assert len(artifacts) == 1
    assert artifacts[0].status == "executed"


def test_three_subtasks_run_in_order_with_context_passing(shop_adapter):
    captured = []

    def responder(prompt):
        captured.append(prompt)
        if "### SCHEMA-FILTER" in prompt:
            return json.dumps([{"table": "orders", "columns": ["amount", "status"]}])
        if "### SQL-GENERATE" in prompt:
            if "Task: count them" in prompt:
                return "SELECT COUNT(amount) AS n FROM orders"
            if "Task: sum them" in prompt:
                return "SELECT SUM(amount) AS s FROM orders"
            return "SELECT status FROM orders"
        raise AssertionError(prompt[:100])

    engine = make_engine(shop_adapter, default=responder)
    plan = plan_for(
        engine,
        single=False,
        subtasks=(
            Subtask("count them", "count rows"),
            Subtask("sum them", "sum amounts"),
            Subtask("list status", "status values"),
        ),
    )
    artifacts = engine.run_subtasks(plan)
    assert [a.status for a in artifacts] == ["executed"] * 3
    assert "COUNT" in artifacts[0].sql and "SUM" in artifacts[1].sql
    # The second generation prompt carries the first subtask's SQL and preview.
    second_gen = [p for p in captured if "### SQL-GENERATE" in p and "sum them" in p][0]
    assert "COUNT(`amount`)" in second_gen
    assert "Context from earlier subtasks" in second_gen


def test_failed_subtask_does_not_stop_the_run(shop_adapter):
    def responder(prompt):
        if "### SCHEMA-FILTER" in prompt:
            if "Task: break" in prompt:
                return "[]"  # empty subset -> failure for this subtask
            return json.dumps([{"table": "users", "columns": ["name"]}])
        if "### SQL-GENERATE" in prompt:
            return "SELECT name FROM users"
        raise AssertionError(prompt[:100])

    engine = make_engine(shop_adapter, default=responder)
    plan = plan_for(
        engine,
        single=False,
        subtasks=(
            Subtask("list names", "x"),
            Subtask("break", "y"),
            Subtask("list names again", "z"),
        ),
    )
    artifacts = engine.run_subtasks(plan)
    assert [a.status for a in artifacts] == ["executed", "failed", "executed"]


def test_prompt_dump_flag_writes_every_prompt(shop_adapter, tmp_path):
    rules = [
        ScriptedRule("### SCHEMA-FILTER", json.dumps([{"table": "users", "columns": ["name"]}])),
        ScriptedRule("### SQL-GENERATE", "SELECT name FROM users"),
    ]
    gateway = scripted_gateway(rules)
    engine = SqlEngine(
        gateway,
        seeded_index(),
        shop_adapter,
        shop_adapter.introspect(),
        PipelineConfig(),
        prompt_dump_dir=tmp_path / "prompts",
    )
    subset = engine.filter_schema(task_for("names"))
    engine.generate_sql(task_for("names"), subset)
    dumped = sorted((tmp_path / "prompts").glob("*.txt"))
    assert len(dumped) == 2
    assert "SCHEMA-FILTER" in dumped[0].read_text()
