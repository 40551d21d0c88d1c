"""Hierarchical data context builder.

Builds column summaries, table descriptions via map-reduce, table
relationships (coarse similarity search + one fine-grained model call per
table), entities, a database summary, and suggested questions — persisting
every artifact to the vector index.

Parallelism never changes the output: model calls fan out to a thread pool,
results are collected keyed by their origin, and persistence happens in
deterministic order afterwards.
"""

from __future__ import annotations

import json
import logging
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .. import prompts
from ..domain import (
    ANALYSIS_TYPES,
    TABLE_TYPES,
    ColumnSummary,
    DatabaseSummary,
    EntitySummary,
    PipelineConfig,
    SuggestedQuestion,
    TableRelationship,
    TableSummary,
    to_json_dict,
)
from ..errors import BudgetError, LlmError, ValidationError
from ..llm.gateway import CompletionRequest, Gateway
from ..vectors.index import VectorIndex
from ..db.types import SchemaSnapshot, TableMeta

log = logging.getLogger(__name__)

FALLBACK_QUESTIONS = {
    "descriptive": "What are the overall counts and totals across the main tables?",
    "inferential": "Which factors in the data are correlated with the key measures?",
    "diagnostic": "What explains the largest recent change in the key measures?",
    "predictive": "How are the key measures likely to develop going forward?",
    "prescriptive": "Which actions do the trends in this data suggest taking?",
}


@dataclass(frozen=True)
class ColumnBlock:
    """A vertical partition of one table's columns, in declared order."""

    table: str
    columns: tuple
    ordinal: int


@dataclass(frozen=True)
class DescriptionBatch:
    """Per-block table descriptions, ordered by originating block ordinal."""

    table: str
    entries: tuple[str, ...]


@dataclass
class BuildReport:
    database: str = ""
    stages: dict = field(default_factory=dict)
    tables_total: int = 0
    tables_skipped: dict = field(default_factory=dict)
    columns_summarized: int = 0
    relationship_count: int = 0
    dropped_relationships: int = 0
    entity_count: int = 0
    question_count: int = 0
    filled_question_types: list = field(default_factory=list)
    reduce_levels: dict = field(default_factory=dict)
    tokens_by_tag: dict = field(default_factory=dict)
    totals: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "database": self.database,
            "stages": self.stages,
            "tables_total": self.tables_total,
            "tables_skipped": self.tables_skipped,
            "columns_summarized": self.columns_summarized,
            "relationship_count": self.relationship_count,
            "dropped_relationships": self.dropped_relationships,
            "entity_count": self.entity_count,
            "question_count": self.question_count,
            "filled_question_types": self.filled_question_types,
            "reduce_levels": self.reduce_levels,
            "tokens_by_tag": self.tokens_by_tag,
            "totals": self.totals,
        }


def partition_columns(table_meta: TableMeta, group_size: int) -> list[ColumnBlock]:
    """Split a table's columns into ceil(n / group_size) blocks, order intact."""
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    columns = list(table_meta.columns)
    blocks = []
    for ordinal, start in enumerate(range(0, len(columns), group_size)):
        blocks.append(
            ColumnBlock(table_meta.name, tuple(columns[start : start + group_size]), ordinal)
        )
    return blocks


def parse_json_reply(text: str, stage: str):
    """Parse a model reply as JSON, tolerating code fences."""
    cleaned = text.strip()
    if cleaned.startswith("```"):
        cleaned = cleaned.strip("`")
        if cleaned.startswith("json"):
            cleaned = cleaned[4:]
    try:
        return json.loads(cleaned)
    except json.JSONDecodeError as exc:
        raise LlmError(f"{stage}: model reply is not valid JSON: {text[:200]!r}") from exc


class HdcBuilder:
    """Runs the full context build for one database."""

    def __init__(
        self,
        adapter,
        gateway: Gateway,
        index: VectorIndex,
        config: PipelineConfig,
        database: str = "main",
        sample_seed: int = 0,
    ):
        self.adapter = adapter
        self.gateway = gateway
        self.index = index
        self.config = config
        self.database = database
        self.sample_seed = sample_seed
        self.snapshot: SchemaSnapshot | None = None
        self.report = BuildReport(database=database)
        self._sample_cache: dict[str, list[tuple]] = {}

    # -- helpers ---------------------------------------------------------------

    @property
    def group_size(self) -> int:
        override = self.gateway.profile.column_group_size
        return override if override else self.config.column_group_size

    def _complete(self, prompt: str, tag: str, max_output_tokens: int = 1024) -> str:
        request = CompletionRequest.with_config(self.config, prompt, tag, max_output_tokens)
        return self.gateway.complete(request).text

    def _check_budget(self, prompt: str, stage: str) -> None:
        tokens = self.gateway.count_tokens(prompt)
        if tokens > self.config.max_prompt_tokens:
            raise BudgetError(
                f"{stage}: prompt of {tokens} tokens exceeds max_prompt_tokens "
                f"{self.config.max_prompt_tokens}"
            )

    def _table_samples(self, table: str) -> list[tuple]:
        if table not in self._sample_cache:
            seed = zlib.crc32(table.encode("utf-8")) ^ self.sample_seed
            self._sample_cache[table] = self.adapter.sample_rows(
                table, self.config.sample_rows_per_column, seed
            )
        return self._sample_cache[table]

    # -- column summaries --------------------------------------------------------

    def summarize_columns(self, block: ColumnBlock) -> list[ColumnSummary]:
        """One model call describing every column of the block."""
        if self.snapshot is None:
            self.snapshot = self.adapter.introspect()
        rows = self._table_samples(block.table)
        samples_by_column = {}
        meta = self.snapshot.table(block.table)
        all_names = meta.column_names() if meta else [c.name for c in block.columns]
        for col in block.columns:
            idx = all_names.index(col.name)
            samples_by_column[col.name] = [str(row[idx]) for row in rows]

        term_hits = self.index.search(
            "domain_term", f"{block.table} {' '.join(c.name for c in block.columns)}", k=5
        )
        terms = "\n".join(f"- {h.metadata.get('term', h.id)}: {h.metadata.get('definition', '')}" for h in term_hits)
        column_lines = "\n".join(
            f"- {c.name} | {c.declared_type or 'unknown'} | {samples_by_column[c.name]}"
            for c in block.columns
        )
        prompt = prompts.COLUMN_BATCH.format(
            table=block.table,
            ordinal=block.ordinal,
            database=self.database,
            terms=terms or "(none)",
            columns=column_lines,
        )
        self._check_budget(prompt, f"column summary {block.table}#{block.ordinal}")
        reply = self._complete(prompt, "hdc.columns")
        described = parse_json_reply(reply, f"column summary {block.table}")
        if not isinstance(described, dict):
            raise LlmError(f"column summary {block.table}: expected a JSON object")

        summaries = []
        for col in block.columns:
            description = str(described.get(col.name, "")).strip()
            if not description:
                raise LlmError(
                    f"column summary {block.table}#{block.ordinal}: missing column {col.name!r}"
                )
            if col.comment:
                description = f"{description} Comment: {col.comment}"
            summaries.append(
                ColumnSummary(
                    database=self.database,
                    table=block.table,
                    column=col.name,
                    declared_type=col.declared_type,
                    description=description,
                    comment=col.comment,
                    sample_values=tuple(samples_by_column[col.name]),
                    vector_id=f"{block.table}.{col.name}",
                )
            )
        return summaries

    def persist_column_summary(self, summary: ColumnSummary) -> None:
        self.index.add(
            "column_desc",
            summary.vector_id,
            summary.description,
            {
                "table": summary.table,
                "column": summary.column,
                "artifact": json.dumps(to_json_dict(summary), sort_keys=True),
            },
        )

    # -- table description map-reduce ------------------------------------------------

    def describe_block(self, table: TableMeta, block: ColumnBlock) -> str:
        """One map-phase description, fed by the block's indexed column summaries."""
        docs = [self.index.get("column_desc", f"{table.name}.{c.name}") for c in block.columns]
        lines = "\n".join(
            f"- {c.name}: {doc.text if doc else '(no description)'}"
            for c, doc in zip(block.columns, docs)
        )
        prompt = prompts.TABLE_BLOCK.format(table=table.name, ordinal=block.ordinal, summaries=lines)
        self._check_budget(prompt, f"table block {table.name}#{block.ordinal}")
        return self._complete(prompt, "hdc.table_map")

    def map_table_blocks(self, table: TableMeta, executor: ThreadPoolExecutor | None = None) -> DescriptionBatch:
        """Map phase: one description per block, order-stable under parallelism."""
        blocks = partition_columns(table, self.group_size)
        if executor is None:
            entries = [self.describe_block(table, b) for b in blocks]
        else:
            futures = [(b.ordinal, executor.submit(self.describe_block, table, b)) for b in blocks]
            entries = [f.result() for _, f in sorted(futures, key=lambda p: p[0])]
        return DescriptionBatch(table.name, tuple(entries))

    def reduce_table_descriptions(self, batch: DescriptionBatch, max_tokens: int) -> str:
        text, _levels = self.reduce_with_stats(batch, max_tokens)
        return text

    def reduce_with_stats(self, batch: DescriptionBatch, max_tokens: int) -> tuple[str, int]:
        """Recursive reduce per the map-reduce scheme; returns (text, recursion levels)."""
        if not batch.entries:
            raise ValueError("cannot reduce an empty batch")
        count = self.gateway.count_tokens
        for entry in batch.entries:
            if count(entry) > max_tokens:
                raise BudgetError(
                    f"table {batch.table}: a single description entry exceeds "
                    f"max_tokens {max_tokens}; reduce cannot make progress"
                )

        def reduce_call(entries: list[str]) -> str:
            prompt = prompts.TABLE_REDUCE.format(table=batch.table, entries="\n\n".join(entries))
            self._check_budget(prompt, f"table reduce {batch.table}")
            return self._complete(prompt, "hdc.table_reduce")

        entries = list(batch.entries)
        levels = 0
        while True:
            levels += 1
            if len(entries) == 1:
                return reduce_call(entries), levels
            new_entries: list[str] = []
            current: list[str] = []
            for description in entries:
                joined = "\n\n".join(current)
                if current and count(joined) + count(description) > max_tokens:
                    new_entries.append(reduce_call(current))
                    current = []
                current.append(description)
            if current:
                new_entries.append(reduce_call(current))
            entries = new_entries

    def reduce_group_budget(self) -> int:
        """Grouping budget that keeps every reduce prompt within max_prompt_tokens."""
        overhead = self.gateway.count_tokens(
            prompts.TABLE_REDUCE.format(table="x" * 40, entries="")
        )
        return max(1, self.config.max_prompt_tokens - overhead - 64)

    # -- table profile -----------------------------------------------------------

    def derive_table_profile(self, table: TableMeta, description: str) -> TableSummary:
        prompt = prompts.TABLE_PROFILE.format(
            table=table.name,
            description=description,
            columns=", ".join(table.column_names()),
            declared_keys=", ".join(table.declared_keys) or "(none)",
        )
        self._check_budget(prompt, f"table profile {table.name}")
        reply = self._complete(prompt, "hdc.table_profile")
        profile = parse_json_reply(reply, f"table profile {table.name}")

        attributes = [str(a) for a in profile.get("key_attributes", [])]
        if len(attributes) > 5:
            retry_prompt = prompts.TABLE_PROFILE_RETRY.format(
                table=table.name, count=len(attributes), previous=reply
            )
            retry_reply = self._complete(retry_prompt, "hdc.table_profile")
            profile = parse_json_reply(retry_reply, f"table profile retry {table.name}")
            attributes = [str(a) for a in profile.get("key_attributes", [])]
            if len(attributes) > 5:
                raise ValidationError(
                    f"table {table.name}: still {len(attributes)} key attributes "
                    "after the corrective re-prompt (maximum is 5)"
                )

        table_type = str(profile.get("table_type", "")).strip().lower()
        if table_type not in TABLE_TYPES:
            raise LlmError(
                f"table {table.name}: table_type {table_type!r} is not one of {TABLE_TYPES}"
            )
        return TableSummary(
            table=table.name,
            description=description,
            chosen_primary_key=str(profile.get("chosen_primary_key", "")),
            key_attributes=tuple(attributes),
            table_type=table_type,
            main_entity=str(profile.get("main_entity", "")),
            nl_description=str(profile.get("nl_description", "")),
            vector_id=table.name,
        )

    def persist_table_summary(self, summary: TableSummary) -> None:
        self.index.add(
            "table_desc",
            summary.table,
            summary.description,
            {
                "table": summary.table,
                "artifact": json.dumps(to_json_dict(summary), sort_keys=True),
            },
        )

    # -- relationships --------------------------------------------------------------

    def discover_relationships(self, table: TableMeta, similar_count: int) -> list[TableRelationship]:
        """Coarse similarity search for candidates, then one fine-grained call."""
        doc = self.index.get("table_desc", table.name)
        if doc is None:
            raise LlmError(f"table {table.name}: no indexed description for relationship discovery")
        hits = self.index.search_vector("table_desc", doc.vector, similar_count + 1)
        candidates = [h for h in hits if h.id != table.name][:similar_count]

        candidate_lines = []
        for hit in candidates:
            cand_doc = self.index.get("table_desc", hit.id)
            cand_meta = self.snapshot.table(hit.id) if self.snapshot else None
            cols = ", ".join(cand_meta.column_names()) if cand_meta else ""
            candidate_lines.append(f"- {hit.id} (columns: {cols}): {cand_doc.text if cand_doc else ''}")
        prompt = prompts.TABLE_RELATIONSHIPS.format(
            table=table.name,
            columns=", ".join(table.column_names()),
            candidates="\n".join(candidate_lines) or "(no candidate tables)",
        )
        self._check_budget(prompt, f"relationships {table.name}")
        reply = self._complete(prompt, "hdc.relationships")
        raw = parse_json_reply(reply, f"relationships {table.name}")
        if not isinstance(raw, list):
            raise LlmError(f"relationships {table.name}: expected a JSON list")

        edges = []
        for item in raw:
            rel = self._normalize_relationship(item)
            if rel is None:
                self.report.dropped_relationships += 1
                continue
            edges.append(rel)
        return edges

    def _normalize_relationship(self, item: dict) -> TableRelationship | None:
        if not isinstance(item, dict):
            return None
        referencing = str(item.get("referencing_table", ""))
        referenced = str(item.get("referenced_table", ""))
        fk = str(item.get("foreign_key_column", ""))
        pk = str(item.get("primary_key_column", ""))
        rel_type = str(item.get("relationship_type", "1:N")).upper().replace(" ", "")
        if rel_type not in ("1:1", "1:N"):
            rel_type = "1:N"
        snapshot = self.snapshot
        if snapshot is None:
            return None
        if not snapshot.has_column(referencing, fk) or not snapshot.has_column(referenced, pk):
            log.info("dropping unresolvable relationship %s.%s -> %s.%s", referencing, fk, referenced, pk)
            return None
        return TableRelationship(
            referencing_table=referencing,
            referenced_table=referenced,
            foreign_key_column=fk,
            primary_key_column=pk,
            relationship_type=rel_type,
            self_reference=referencing == referenced,
        )

    def persist_relationship(self, rel: TableRelationship) -> None:
        doc_id = f"{rel.referencing_table}.{rel.foreign_key_column}->{rel.referenced_table}.{rel.primary_key_column}"
        text = (
            f"{rel.referencing_table}.{rel.foreign_key_column} references "
            f"{rel.referenced_table}.{rel.primary_key_column} ({rel.relationship_type})"
        )
        self.index.add(
            "table_rel",
            doc_id,
            text,
            {
                "referencing_table": rel.referencing_table,
                "referenced_table": rel.referenced_table,
                "artifact": json.dumps(to_json_dict(rel), sort_keys=True),
            },
        )

    # -- entities ---------------------------------------------------------------------

    @staticmethod
    def relationship_degrees(relationships: list[TableRelationship]) -> dict[str, int]:
        """Undirected degree: each distinct edge counts once per endpoint."""
        unique = {
            (r.referencing_table, r.referenced_table, r.foreign_key_column, r.primary_key_column)
            for r in relationships
        }
        degrees: dict[str, int] = {}
        for referencing, referenced, _fk, _pk in unique:
            degrees[referencing] = degrees.get(referencing, 0) + 1
            if referenced != referencing:
                degrees[referenced] = degrees.get(referenced, 0) + 1
        return degrees

    def rank_candidate_tables(self, relationships: list[TableRelationship], top_n: int) -> list[str]:
        """Top-N tables by relationship degree; ties break by table name."""
        degrees = self.relationship_degrees(relationships)
        names = self.snapshot.table_names() if self.snapshot else list(degrees)
        ranked = sorted(names, key=lambda t: (-degrees.get(t, 0), t))
        return ranked[:top_n]

    def extract_entities(
        self, relationships: list[TableRelationship], top_n: int,
        table_summaries: dict[str, TableSummary],
    ) -> list[EntitySummary]:
        if not relationships:
            return []
        candidates = self.rank_candidate_tables(relationships, top_n)
        lines = []
        for name in candidates:
            summary = table_summaries.get(name)
            attrs = ", ".join(summary.key_attributes) if summary else ""
            desc = summary.nl_description or summary.description if summary else ""
            lines.append(f"- {name} (key attributes: {attrs}): {desc}")
        prompt = prompts.ENTITY_EXTRACTION.format(database=self.database, candidates="\n".join(lines))
        self._check_budget(prompt, "entity extraction")
        reply = self._complete(prompt, "hdc.entities")
        raw = parse_json_reply(reply, "entity extraction")
        if not isinstance(raw, list):
            raise LlmError("entity extraction: expected a JSON list")

        known_tables = set(self.snapshot.table_names()) if self.snapshot else set()
        entities = []
        for item in raw:
            if not isinstance(item, dict):
                continue
            members = [str(t) for t in item.get("member_tables", []) if str(t) in known_tables]
            if not members:
                continue
            allowed_attrs = set()
            for member in members:
                summary = table_summaries.get(member)
                if summary:
                    allowed_attrs.update(summary.key_attributes)
            attrs = [str(a) for a in item.get("key_attributes", []) if str(a) in allowed_attrs]
            entities.append(
                EntitySummary(
                    name=str(item.get("name", "")),
                    summary=str(item.get("summary", "")),
                    key_attributes=tuple(attrs),
                    member_tables=tuple(members),
                )
            )
        return entities

    def persist_entity(self, entity: EntitySummary) -> None:
        self.index.add(
            "entity",
            entity.name,
            f"{entity.name}: {entity.summary}",
            {"artifact": json.dumps(to_json_dict(entity), sort_keys=True)},
        )

    # -- database summary ----------------------------------------------------------------

    def summarize_database(
        self,
        entities: list[EntitySummary],
        table_summaries: dict[str, TableSummary] | None = None,
    ) -> DatabaseSummary:
        if entities:
            context = "\n".join(
                f"- Entity {e.name} (tables: {', '.join(e.member_tables)}): {e.summary}"
                for e in entities
            )
        else:
            summaries = table_summaries or {}
            context = "\n".join(
                f"- Table {name}: {s.nl_description or s.description}"
                for name, s in sorted(summaries.items())
            ) or "(no tables)"
        prompt = prompts.DATABASE_SUMMARY.format(database=self.database, context=context)
        self._check_budget(prompt, "database summary")
        reply = self._complete(prompt, "hdc.db_summary")
        data = parse_json_reply(reply, "database summary")

        short = str(data.get("short_summary", ""))
        if len(short.split()) > 10:
            retry_prompt = prompts.DATABASE_SUMMARY_RETRY.format(
                database=self.database, count=len(short.split()), previous=reply
            )
            retry_reply = self._complete(retry_prompt, "hdc.db_summary")
            data = parse_json_reply(retry_reply, "database summary retry")
            short = str(data.get("short_summary", ""))
            if len(short.split()) > 10:
                short = " ".join(short.split()[:10])

        return DatabaseSummary(
            purpose=str(data.get("purpose", "")),
            domain=str(data.get("domain", "")),
            business_impact=str(data.get("business_impact", "")),
            real_world_example=str(data.get("real_world_example", "")),
            user_friendly_description=str(data.get("user_friendly_description", "")),
            short_summary=short,
        )

    def persist_database_summary(self, summary: DatabaseSummary) -> None:
        self.index.add(
            "db_summary",
            self.database,
            summary.user_friendly_description or summary.purpose,
            {"artifact": json.dumps(to_json_dict(summary), sort_keys=True)},
        )

    # -- suggested questions -----------------------------------------------------------------

    def suggest_questions(
        self, db_summary: DatabaseSummary, entities: list[EntitySummary]
    ) -> list[SuggestedQuestion]:
        entity_lines = "\n".join(f"- {e.name}: {e.summary}" for e in entities) or "(none)"
        prompt = prompts.SUGGESTED_QUESTIONS.format(
            database=self.database,
            summary=db_summary.user_friendly_description,
            entities=entity_lines,
        )
        self._check_budget(prompt, "suggested questions")
        reply = self._complete(prompt, "hdc.questions")
        questions = self._parse_questions(reply)

        missing = [t for t in ANALYSIS_TYPES if all(q.analysis_type != t for q in questions)]
        if missing:
            retry_prompt = prompts.SUGGESTED_QUESTIONS_RETRY.format(
                database=self.database, missing=", ".join(missing)
            )
            retry_reply = self._complete(retry_prompt, "hdc.questions")
            questions.extend(self._parse_questions(retry_reply))
            missing = [t for t in ANALYSIS_TYPES if all(q.analysis_type != t for q in questions)]
        for analysis_type in missing:
            # Mechanical fill keeps the five-type guarantee when the model won't.
            questions.append(SuggestedQuestion(FALLBACK_QUESTIONS[analysis_type], analysis_type))
            self.report.filled_question_types.append(analysis_type)
        return questions

    @staticmethod
    def _parse_questions(reply: str) -> list[SuggestedQuestion]:
        raw = parse_json_reply(reply, "suggested questions")
        if not isinstance(raw, list):
            raise LlmError("suggested questions: expected a JSON list")
        questions = []
        for item in raw:
            if not isinstance(item, dict):
                continue
            analysis_type = str(item.get("analysis_type", "")).strip().lower()
            if analysis_type in ANALYSIS_TYPES and str(item.get("text", "")).strip():
                questions.append(SuggestedQuestion(str(item["text"]), analysis_type))
        return questions

    # -- full build --------------------------------------------------------------------

    def build(self, parallelism: int = 1) -> dict:
        """Run the whole context build; returns the artifact bundle.

        A table whose summarization fails is recorded and skipped; the build
        continues with the rest.
        """
        started = time.monotonic()
        self.snapshot = self.adapter.introspect()
        tables = list(self.snapshot.tables)
        self.report.tables_total = len(tables)
        executor = ThreadPoolExecutor(max_workers=max(1, parallelism))
        timings: dict[str, float] = {}

        try:
            # Stage 1: column summaries (parallel over blocks, persisted in order).
            stage_start = time.monotonic()
            column_results: dict[tuple[str, int], list[ColumnSummary]] = {}
            futures = {}
            for table in tables:
                for block in partition_columns(table, self.group_size):
                    futures[(table.name, block.ordinal)] = executor.submit(
                        self._guarded_summarize, block
                    )
            failed_tables: set[str] = set()
            for key, future in futures.items():
                outcome = future.result()
                if isinstance(outcome, Exception):
                    failed_tables.add(key[0])
                    self.report.tables_skipped.setdefault(key[0], str(outcome))
                else:
                    column_results[key] = outcome
            all_columns: list[ColumnSummary] = []
            for key in sorted(k for k in column_results if k[0] not in failed_tables):
                for summary in column_results[key]:
                    self.persist_column_summary(summary)
                    all_columns.append(summary)
            self.report.columns_summarized = len(all_columns)
            timings["column_summaries"] = time.monotonic() - stage_start

            # Stage 2a: map phase over all (table, block) pairs, flat fan-out.
            stage_start = time.monotonic()
            active = [t for t in tables if t.name not in failed_tables]
            group_budget = self.reduce_group_budget()
            map_futures = {}
            for table in active:
                for block in partition_columns(table, self.group_size):
                    map_futures[(table.name, block.ordinal)] = executor.submit(
                        self._guard, self.describe_block, table, block
                    )
            map_entries: dict[str, list[tuple[int, str]]] = {}
            for (name, ordinal), future in map_futures.items():
                outcome = future.result()
                if isinstance(outcome, Exception):
                    failed_tables.add(name)
                    self.report.tables_skipped.setdefault(name, str(outcome))
                else:
                    map_entries.setdefault(name, []).append((ordinal, outcome))

            # Stage 2b: reduce + profile per table.
            def reduce_and_profile(table: TableMeta):
                entries = [text for _, text in sorted(map_entries[table.name])]
                batch = DescriptionBatch(table.name, tuple(entries))
                description, levels = self.reduce_with_stats(batch, group_budget)
                summary = self.derive_table_profile(table, description)
                return summary, levels

            table_futures = {
                t.name: executor.submit(self._guard, reduce_and_profile, t)
                for t in active
                if t.name not in failed_tables
            }
            table_summaries: dict[str, TableSummary] = {}
            for name in sorted(table_futures):
                outcome = table_futures[name].result()
                if isinstance(outcome, Exception):
                    self.report.tables_skipped.setdefault(name, str(outcome))
                    continue
                summary, levels = outcome
                table_summaries[name] = summary
                self.report.reduce_levels[name] = levels
            for name in sorted(table_summaries):
                self.persist_table_summary(table_summaries[name])
            timings["table_summaries"] = time.monotonic() - stage_start

            # Stage 3: relationships — one search + one completion per table.
            stage_start = time.monotonic()
            rel_futures = {
                name: executor.submit(
                    self._guard,
                    self.discover_relationships,
                    self.snapshot.table(name),
                    self.config.relationship_similar_count,
                )
                for name in sorted(table_summaries)
            }
            seen_edges = set()
            relationships: list[TableRelationship] = []
            for name in sorted(rel_futures):
                outcome = rel_futures[name].result()
                if isinstance(outcome, Exception):
                    self.report.tables_skipped.setdefault(name, str(outcome))
                    continue
                for rel in outcome:
                    key = (
                        rel.referencing_table,
                        rel.referenced_table,
                        rel.foreign_key_column,
                        rel.primary_key_column,
                    )
                    if key in seen_edges:
                        continue
                    seen_edges.add(key)
                    relationships.append(rel)
            relationships.sort(
                key=lambda r: (r.referencing_table, r.referenced_table, r.foreign_key_column)
            )
            for rel in relationships:
                self.persist_relationship(rel)
            self.report.relationship_count = len(relationships)
            timings["relationships"] = time.monotonic() - stage_start

            # Stages 4-6: entities, database summary, suggested questions.
            stage_start = time.monotonic()
            entities = self.extract_entities(relationships, self.config.entity_top_n, table_summaries)
            for entity in entities:
                self.persist_entity(entity)
            self.report.entity_count = len(entities)
            timings["entities"] = time.monotonic() - stage_start

            stage_start = time.monotonic()
            db_summary = self.summarize_database(entities, table_summaries)
            self.persist_database_summary(db_summary)
            timings["database_summary"] = time.monotonic() - stage_start

            stage_start = time.monotonic()
            questions = self.suggest_questions(db_summary, entities)
            self.report.question_count = len(questions)
            timings["suggested_questions"] = time.monotonic() - stage_start
        finally:
            executor.shutdown(wait=True)

        timings["total"] = time.monotonic() - started
        self.report.stages = {k: round(v, 6) for k, v in timings.items()}
        self.report.tokens_by_tag = {
            tag: c.as_dict() for tag, c in sorted(self.gateway.counters_by_tag().items())
        }
        self.report.totals = self.gateway.totals().as_dict()

        return {
            "database": self.database,
            "columns": [to_json_dict(c) for c in all_columns],
            "tables": [to_json_dict(table_summaries[n]) for n in sorted(table_summaries)],
            "relationships": [to_json_dict(r) for r in relationships],
            "entities": [to_json_dict(e) for e in entities],
            "database_summary": to_json_dict(db_summary),
            "suggested_questions": [to_json_dict(q) for q in questions],
        }

    def _guarded_summarize(self, block: ColumnBlock):
        return self._guard(self.summarize_columns, block)

    @staticmethod
    def _guard(fn, *args):
        """Convert per-table failures into values so one table cannot sink the build."""
        try:
            return fn(*args)
        except (LlmError, BudgetError, ValidationError) as exc:
            log.warning("table stage failed: %s", exc)
            return exc
