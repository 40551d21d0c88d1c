"""Cross-module data artifacts of the analysis pipeline.

Every type here is an immutable value object: sequence fields are coerced to
tuples at construction so instances can be shared freely between concurrent
tasks. The canonical serialized form is JSON with snake_case keys matching the
field names; ``to_json_dict`` / ``from_json_dict`` implement it and round-trip
losslessly. ``validate`` reports invariant violations without raising.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from typing import Any

TABLE_TYPES = ("dimension", "bridge", "fact")
ANALYSIS_TYPES = ("descriptive", "inferential", "diagnostic", "predictive", "prescriptive")
RELATIONSHIP_TYPES = ("1:1", "1:N")
CHART_TYPES = ("pie", "line", "bar", "table")
SQL_STATUSES = ("generated", "explain_ok", "executed", "failed")
REFINE_STAGES = ("explain", "execute")


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, tuple):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, dict):
        return {k: _freeze(v) for k, v in value.items()}
    return value


class _Frozen:
    """Base: coerce list fields to tuples so frozen instances are deeply immutable."""

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _freeze(getattr(self, f.name)))


@dataclass(frozen=True)
class PipelineConfig(_Frozen):
    """Every pipeline hyperparameter in one place.

    ``column_group_size`` is model-class dependent (wide-context models take
    larger groups) and can be overridden per provider profile.
    """

    column_group_size: int = 40
    relationship_similar_count: int = 20
    entity_top_n: int = 20
    schema_filter_top_n: int = 30
    max_prompt_tokens: int = 6000
    max_refine_rounds: int = 3
    temperature: float = 0.0
    top_p: float = 1.0
    sample_rows_per_column: int = 3


@dataclass(frozen=True)
class ColumnSummary(_Frozen):
    database: str
    table: str
    column: str
    declared_type: str
    description: str
    comment: str | None = None
    sample_values: tuple[str, ...] = ()
    vector_id: str = ""


@dataclass(frozen=True)
class TableSummary(_Frozen):
    table: str
    description: str
    chosen_primary_key: str
    key_attributes: tuple[str, ...]
    table_type: str
    main_entity: str
    nl_description: str
    vector_id: str = ""


@dataclass(frozen=True)
class TableRelationship(_Frozen):
    referencing_table: str
    referenced_table: str
    foreign_key_column: str
    primary_key_column: str
    relationship_type: str
    self_reference: bool = False


@dataclass(frozen=True)
class EntitySummary(_Frozen):
    name: str
    summary: str
    key_attributes: tuple[str, ...]
    member_tables: tuple[str, ...]


@dataclass(frozen=True)
class DatabaseSummary(_Frozen):
    purpose: str
    domain: str
    business_impact: str
    real_world_example: str
    user_friendly_description: str
    short_summary: str


@dataclass(frozen=True)
class SuggestedQuestion(_Frozen):
    text: str
    analysis_type: str


@dataclass(frozen=True)
class Ambiguity(_Frozen):
    concept: str
    explanation: str


@dataclass(frozen=True)
class ClarifiedTask(_Frozen):
    original_question: str
    main_concepts: tuple[str, ...]
    ambiguities: tuple[Ambiguity, ...]
    refined_task: str
    detailed_description: str


@dataclass(frozen=True)
class Subtask(_Frozen):
    description: str
    detail: str


@dataclass(frozen=True)
class DecompositionPlan(_Frozen):
    parent: ClarifiedTask
    single_sql_answerable: bool
    subtasks: tuple[Subtask, ...]


@dataclass(frozen=True)
class RefineRound(_Frozen):
    round: int
    stage: str
    error_text: str
    replacement_sql: str


@dataclass(frozen=True)
class TablePreview(_Frozen):
    """Bounded tabular result attached to an executed artifact."""

    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]


@dataclass(frozen=True)
class SqlArtifact(_Frozen):
    task: ClarifiedTask
    sql: str
    status: str
    refinement_trace: tuple[RefineRound, ...] = ()
    result_preview: TablePreview | None = None


@dataclass(frozen=True)
class ChartSpec(_Frozen):
    chart_type: str
    bindings: dict = field(default_factory=dict)


_NESTED = {
    "ambiguities": Ambiguity,
    "subtasks": Subtask,
    "refinement_trace": RefineRound,
}
_NESTED_SCALAR = {
    "parent": ClarifiedTask,
    "task": ClarifiedTask,
    "result_preview": TablePreview,
}


def to_json_dict(artifact) -> dict:
    """Serialize any domain type to its canonical JSON-ready dict."""
    out = {}
    for f in fields(artifact):
        value = getattr(artifact, f.name)
        out[f.name] = _to_json_value(value)
    return out


def _to_json_value(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_json_dict(value)
    if isinstance(value, tuple):
        return [_to_json_value(v) for v in value]
    if isinstance(value, dict):
        return {k: _to_json_value(v) for k, v in value.items()}
    return value


def from_json_dict(cls, data: dict):
    """Reconstruct a domain instance from its canonical dict form."""
    kwargs = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.name in _NESTED and isinstance(value, list):
            value = [from_json_dict(_NESTED[f.name], v) for v in value]
        elif f.name in _NESTED_SCALAR and isinstance(value, dict):
            value = from_json_dict(_NESTED_SCALAR[f.name], value)
        elif f.name == "rows" and isinstance(value, list):
            value = [tuple(r) for r in value]
        kwargs[f.name] = value
    return cls(**kwargs)


def word_count(text: str) -> int:
    """Whitespace-tokenized word count, used for the summary length cap."""
    return len(text.split())


def validate(artifact, config: PipelineConfig | None = None) -> list[str]:
    """Return the list of violated invariants for ``artifact`` (empty = valid).

    Pure and total: never mutates its argument and never raises on structurally
    complete input. Invariants that need schema context (identifier resolution)
    are enforced where the artifact is built, not here.
    """
    cfg = config or PipelineConfig()
    problems: list[str] = []

    if isinstance(artifact, PipelineConfig):
        for name in (
            "column_group_size",
            "relationship_similar_count",
            "entity_top_n",
            "schema_filter_top_n",
            "max_prompt_tokens",
            "max_refine_rounds",
            "sample_rows_per_column",
        ):
            if getattr(artifact, name) < 1:
                problems.append(f"{name} must be >= 1")
        if not 0.0 <= artifact.temperature <= 1.0:
            problems.append("temperature must be in [0, 1]")
        if not 0.0 < artifact.top_p <= 1.0:
            problems.append("top_p must be in (0, 1]")

    elif isinstance(artifact, ColumnSummary):
        if not artifact.description.strip():
            problems.append("description must be non-empty")

    elif isinstance(artifact, TableSummary):
        if len(artifact.key_attributes) > 5:
            problems.append("key_attributes length <= 5")
        if artifact.table_type not in TABLE_TYPES:
            problems.append(f"table_type must be one of {TABLE_TYPES}")

    elif isinstance(artifact, TableRelationship):
        if artifact.referencing_table == artifact.referenced_table and not artifact.self_reference:
            problems.append("self-reference must be explicitly flagged")
        if artifact.relationship_type not in RELATIONSHIP_TYPES:
            problems.append(f"relationship_type must be one of {RELATIONSHIP_TYPES}")

    elif isinstance(artifact, EntitySummary):
        if not artifact.member_tables:
            problems.append("member_tables must be non-empty")

    elif isinstance(artifact, DatabaseSummary):
        if word_count(artifact.short_summary) > 10:
            problems.append("short_summary word count <= 10")

    elif isinstance(artifact, SuggestedQuestion):
        if artifact.analysis_type not in ANALYSIS_TYPES:
            problems.append(f"analysis_type must be one of {ANALYSIS_TYPES}")

    elif isinstance(artifact, ClarifiedTask):
        if not artifact.refined_task.strip():
            problems.append("refined_task must be non-empty")
        for amb in artifact.ambiguities:
            if amb.concept not in artifact.main_concepts:
                problems.append(f"ambiguity concept {amb.concept!r} not in main_concepts")
            if not amb.explanation.strip():
                problems.append(f"ambiguity {amb.concept!r} has empty explanation")

    elif isinstance(artifact, DecompositionPlan):
        if artifact.single_sql_answerable != (len(artifact.subtasks) == 0):
            problems.append("single_sql_answerable must hold iff subtasks is empty")
        descriptions = [s.description for s in artifact.subtasks]
        if len(descriptions) != len(set(descriptions)):
            problems.append("subtask descriptions must be pairwise distinct")

    elif isinstance(artifact, SqlArtifact):
        if artifact.status not in SQL_STATUSES:
            problems.append(f"status must be one of {SQL_STATUSES}")
        if len(artifact.refinement_trace) > cfg.max_refine_rounds * 2:
            problems.append("refinement_trace length <= max_refine_rounds * 2")
        rounds = [r.round for r in artifact.refinement_trace]
        if any(b <= a for a, b in zip(rounds, rounds[1:])):
            problems.append("trace round numbers must strictly increase")
        if any(r.round > cfg.max_refine_rounds for r in artifact.refinement_trace):
            problems.append("trace round must be <= max_refine_rounds")
        if any(r.stage not in REFINE_STAGES for r in artifact.refinement_trace):
            problems.append(f"trace stage must be one of {REFINE_STAGES}")
        if artifact.status == "executed" and artifact.refinement_trace:
            if not artifact.refinement_trace[-1].replacement_sql.strip():
                problems.append("executed artifact must end on a resolving replacement")

    elif isinstance(artifact, ChartSpec):
        if artifact.chart_type not in CHART_TYPES:
            problems.append(f"chart_type must be one of {CHART_TYPES}")
        if artifact.chart_type == "table" and artifact.bindings:
            problems.append("table chart must have empty bindings")
        if artifact.chart_type == "pie":
            missing = {"label", "value"} - set(artifact.bindings)
            if missing:
                problems.append(f"pie bindings missing {sorted(missing)}")
        if artifact.chart_type in ("line", "bar"):
            missing = {"x", "y"} - set(artifact.bindings)
            if missing:
                problems.append(f"{artifact.chart_type} bindings missing {sorted(missing)}")

    return problems
