"""Schema filtering, SQL generation with rewrite rules, and the refinement chain."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .. import prompts
from ..db.base import is_read_only
from ..db.types import QueryResult, SchemaSnapshot
from ..domain import (
    ClarifiedTask,
    DecompositionPlan,
    PipelineConfig,
    RefineRound,
    SqlArtifact,
    TablePreview,
)
from ..errors import (
    EmptySubset,
    EngineError,
    LlmError,
    NonReadOnlyStatement,
    OutOfSubsetReference,
    RefinementExhausted,
)
from ..hdc.builder import parse_json_reply
from ..llm.gateway import CompletionRequest, Gateway
from ..vectors.index import VectorIndex
from .identifiers import rewrite_sql, unresolved_references

log = logging.getLogger(__name__)

PREVIEW_ROW_LIMIT = 20
FEWSHOT_COUNT = 3


@dataclass(frozen=True)
class SchemaSubset:
    """Tables and columns the task needs, in first-seen order."""

    entries: tuple[tuple[str, tuple[str, ...]], ...]

    def tables(self) -> list[str]:
        return [table for table, _ in self.entries]

    def as_mapping(self) -> dict[str, list[str]]:
        return {table: list(columns) for table, columns in self.entries}

    def is_empty(self) -> bool:
        return not self.entries


class SqlEngine:
    def __init__(
        self,
        gateway: Gateway,
        index: VectorIndex,
        adapter,
        snapshot: SchemaSnapshot,
        config: PipelineConfig,
        prompt_dump_dir: str | Path | None = None,
    ):
        self.gateway = gateway
        self.index = index
        self.adapter = adapter
        self.snapshot = snapshot
        self.config = config
        self.prompt_dump_dir = Path(prompt_dump_dir) if prompt_dump_dir else None
        self._dump_counter = 0

    def _complete(self, prompt: str, tag: str) -> str:
        self._dump_prompt(tag, prompt)
        request = CompletionRequest.with_config(self.config, prompt, tag)
        return self.gateway.complete(request).text

    def _dump_prompt(self, tag: str, prompt: str) -> None:
        if self.prompt_dump_dir is None:
            return
        self.prompt_dump_dir.mkdir(parents=True, exist_ok=True)
        self._dump_counter += 1
        path = self.prompt_dump_dir / f"{self._dump_counter:04d}-{tag.replace('.', '-')}.txt"
        path.write_text(prompt, encoding="utf-8")

    # -- schema filtering ---------------------------------------------------------

    def filter_schema(
        self,
        clarified: ClarifiedTask,
        top_n: int | None = None,
        executor: ThreadPoolExecutor | None = None,
    ) -> SchemaSubset:
        """Coarse similarity recall of tables, then per-block fine filtering."""
        top_n = top_n or self.config.schema_filter_top_n
        hits = self.index.search("table_desc", clarified.refined_task, k=top_n)
        candidates = [h.id for h in hits if self.snapshot.table(h.id) is not None]
        if not candidates:
            raise EmptySubset("no candidate tables retrieved for the task")

        blocks = self._pack_blocks(candidates)
        prompts_by_block = [
            prompts.SCHEMA_FILTER.format(
                ordinal=ordinal,
                task=clarified.refined_task,
                block="\n".join(self._table_payload(t) for t in block),
            )
            for ordinal, block in enumerate(blocks)
        ]
        if executor is None:
            replies = [self._complete(p, "sql.filter") for p in prompts_by_block]
        else:
            futures = [executor.submit(self._complete, p, "sql.filter") for p in prompts_by_block]
            replies = [f.result() for f in futures]

        entries: list[tuple[str, list[str]]] = []
        seen_pairs: set[tuple[str, str]] = set()
        order: dict[str, int] = {}
        for reply in replies:
            parsed = parse_json_reply(reply, "schema filter")
            if not isinstance(parsed, list):
                raise LlmError("schema filter: expected a JSON list")
            for item in parsed:
                if not isinstance(item, dict):
                    continue
                table = str(item.get("table", ""))
                meta = self.snapshot.table(table)
                if meta is None:
                    continue
                if table not in order:
                    order[table] = len(entries)
                    entries.append((table, []))
                slot = entries[order[table]][1]
                for column in item.get("columns", []):
                    column = str(column)
                    if column not in meta.column_names():
                        continue
                    if (table, column) in seen_pairs:
                        continue
                    seen_pairs.add((table, column))
                    slot.append(column)

        subset = SchemaSubset(tuple((t, tuple(cols)) for t, cols in entries if cols))
        if subset.is_empty():
            raise EmptySubset("fine-grained filtering removed every candidate")
        return subset

    def _table_payload(self, table: str) -> str:
        doc = self.index.get("table_desc", table)
        description = doc.text if doc else ""
        column_lines = []
        for col_doc in self.index.documents("column_desc"):
            if col_doc.metadata.get("table") == table:
                column_lines.append(f"    - {col_doc.metadata.get('column')}: {col_doc.text}")
        return f"- Table {table}: {description}\n" + "\n".join(column_lines)

    def _pack_blocks(self, candidates: list[str]) -> list[list[str]]:
        """Greedy packing so each map prompt stays under half the prompt budget."""
        budget = max(1, self.config.max_prompt_tokens // 2)
        count = self.gateway.count_tokens
        blocks: list[list[str]] = []
        current: list[str] = []
        current_tokens = 0
        for table in candidates:
            payload_tokens = count(self._table_payload(table))
            if current and current_tokens + payload_tokens > budget:
                blocks.append(current)
                current = []
                current_tokens = 0
            current.append(table)
            current_tokens += payload_tokens
        if current:
            blocks.append(current)
        return blocks

    # -- SQL generation --------------------------------------------------------------

    def generate_sql(
        self, clarified: ClarifiedTask, subset: SchemaSubset, prior_context: str = ""
    ) -> str:
        """CoT generation over the subset, then the mechanical rewrite pass.

        Returns "" when the model decides no SQL can answer the task.
        """
        if subset.is_empty():
            raise EmptySubset("cannot generate SQL over an empty subset")
        subset_lines = self._subset_lines(subset)
        fewshots = self._fewshot_block(clarified.refined_task)
        prior = f"Context from earlier subtasks:\n{prior_context}\n" if prior_context else ""
        prompt = prompts.SQL_GENERATE.format(
            task=clarified.refined_task,
            detail=clarified.detailed_description,
            subset=subset_lines,
            fewshots=fewshots,
            prior=prior,
        )
        sql = _strip_fences(self._complete(prompt, "sql.generate"))
        if not sql:
            return ""

        mapping = subset.as_mapping()
        bad = unresolved_references(sql, mapping)
        if bad:
            retry_prompt = prompts.SQL_GENERATE_RETRY.format(
                bad_refs=", ".join(bad), subset=subset_lines, previous=sql
            )
            sql = _strip_fences(self._complete(retry_prompt, "sql.generate"))
            if not sql:
                return ""
            bad = unresolved_references(sql, mapping)
            if bad:
                raise OutOfSubsetReference(
                    f"generated SQL still references unknown identifiers: {', '.join(bad)}"
                )

        sql = rewrite_sql(sql, mapping)
        if not is_read_only(sql):
            raise NonReadOnlyStatement(f"generated SQL is not read-only: {sql[:120]!r}")
        snapshot_mapping = {
            t.name: t.column_names() for t in self.snapshot.tables
        }
        dangling = unresolved_references(sql, snapshot_mapping)
        if dangling:
            raise OutOfSubsetReference(
                f"rewritten SQL references identifiers outside the schema: {', '.join(dangling)}"
            )
        return sql

    def _subset_lines(self, subset: SchemaSubset) -> str:
        lines = []
        for table, columns in subset.entries:
            meta = self.snapshot.table(table)
            types = {c.name: c.declared_type for c in meta.columns} if meta else {}
            for column in columns:
                lines.append(f"- {table}.{column} : {types.get(column, '')}")
        return "\n".join(lines)

    def _fewshot_block(self, task_text: str) -> str:
        hits = self.index.search("fewshot_sql", task_text, k=FEWSHOT_COUNT)
        if not hits:
            return ""
        lines = []
        for hit in hits:
            doc = self.index.get("fewshot_sql", hit.id)
            lines.append(f"Q: {doc.text if doc else hit.id}\nSQL: {hit.metadata.get('answer_payload', '')}")
        return "Similar solved questions:\n" + "\n".join(lines) + "\n"

    # -- self-refinement chain ----------------------------------------------------------

    def refine_chain(
        self, task: ClarifiedTask, sql: str, max_rounds: int | None = None
    ) -> SqlArtifact:
        """Explain-check, then execute; feed each failure back for a replacement.

        Every repair consumes one round; raises RefinementExhausted with the
        accumulated trace when the budget runs out.
        """
        max_rounds = max_rounds if max_rounds is not None else self.config.max_refine_rounds
        current = sql
        trace: list[RefineRound] = []
        rounds_used = 0
        while True:
            outcome = self.adapter.explain(current)
            if not outcome.ok:
                if rounds_used >= max_rounds:
                    raise RefinementExhausted(
                        f"explain still failing after {rounds_used} repairs: {outcome.error_text}",
                        trace=trace,
                        final_error=outcome.error_text,
                    )
                rounds_used += 1
                replacement = self._repair(current, "explain", outcome.error_text, outcome.error_class)
                trace.append(RefineRound(rounds_used, "explain", outcome.error_text, replacement))
                current = replacement
                continue

            try:
                result = self.adapter.execute(current, row_limit=PREVIEW_ROW_LIMIT)
            except (EngineError, NonReadOnlyStatement) as exc:
                error_text = getattr(exc, "error_text", str(exc))
                error_class = getattr(exc, "error_class", "other")
                if rounds_used >= max_rounds:
                    raise RefinementExhausted(
                        f"execution still failing after {rounds_used} repairs: {error_text}",
                        trace=trace,
                        final_error=error_text,
                    ) from exc
                rounds_used += 1
                replacement = self._repair(current, "execute", error_text, error_class)
                trace.append(RefineRound(rounds_used, "execute", error_text, replacement))
                current = replacement
                continue

            return SqlArtifact(
                task=task,
                sql=current,
                status="executed",
                refinement_trace=tuple(trace),
                result_preview=_preview(result),
            )

    def _repair(self, sql: str, stage: str, error_text: str, error_class: str) -> str:
        prompt = prompts.SQL_REPAIR.format(
            stage=stage, sql=sql, error_text=error_text, error_class=error_class
        )
        replacement = _strip_fences(self._complete(prompt, "sql.repair"))
        if not replacement:
            raise LlmError(f"repair for {stage} stage returned no SQL")
        return replacement

    # -- plan execution ---------------------------------------------------------------------

    def run_subtasks(self, plan: DecompositionPlan) -> list[SqlArtifact]:
        """One artifact per subtask (or one for the whole task); failures don't stop the run."""
        parent = plan.parent
        if plan.single_sql_answerable:
            tasks = [parent]
        else:
            tasks = [
                ClarifiedTask(
                    original_question=parent.original_question,
                    main_concepts=parent.main_concepts,
                    ambiguities=(),
                    refined_task=subtask.description,
                    detailed_description=subtask.detail,
                )
                for subtask in plan.subtasks
            ]

        artifacts: list[SqlArtifact] = []
        prior_context = ""
        for task in tasks:
            artifact = self._run_one(task, prior_context)
            artifacts.append(artifact)
            if artifact.status == "executed" and artifact.result_preview is not None:
                preview = artifact.result_preview
                prior_context = (
                    f"SQL: {artifact.sql}\n"
                    f"Columns: {', '.join(preview.columns)}\n"
                    f"Rows: {[list(r) for r in preview.rows[:PREVIEW_ROW_LIMIT]]}"
                )
        return artifacts

    def _run_one(self, task: ClarifiedTask, prior_context: str) -> SqlArtifact:
        try:
            subset = self.filter_schema(task)
            sql = self.generate_sql(task, subset, prior_context)
            if not sql:
                return SqlArtifact(task=task, sql="", status="failed")
            return self.refine_chain(task, sql)
        except RefinementExhausted as exc:
            return SqlArtifact(task=task, sql="", status="failed", refinement_trace=tuple(exc.trace))
        except (EmptySubset, OutOfSubsetReference, NonReadOnlyStatement, LlmError) as exc:
            log.warning("subtask failed: %s", exc)
            return SqlArtifact(task=task, sql="", status="failed")


def _strip_fences(text: str) -> str:
    cleaned = text.strip()
    if cleaned.startswith("```"):
        cleaned = cleaned.strip("`")
        if cleaned.lower().startswith("sql"):
            cleaned = cleaned[3:]
    return cleaned.strip().rstrip(";").strip()


def _preview(result: QueryResult) -> TablePreview:
    rows = tuple(
        tuple(v.decode("utf-8", "replace") if isinstance(v, bytes) else v for v in row)
        for row in result.rows[:PREVIEW_ROW_LIMIT]
    )
    return TablePreview(tuple(result.column_names()), rows)
