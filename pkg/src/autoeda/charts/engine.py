"""Rule-based chart recommendation with an advisory model verification pass.

The rule layer is pure and deterministic: column kinds come from declared
types plus sampled values, and the decision table is evaluated in order
(pie, line, bar, table fallback). The verification call can veto a proposal
in favor of the next candidate but can never block the table fallback.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from .. import prompts
from ..db.types import QueryResult
from ..domain import ChartSpec, ClarifiedTask, PipelineConfig
from ..errors import AutoEdaError
from ..hdc.builder import parse_json_reply
from ..llm.gateway import CompletionRequest, Gateway

log = logging.getLogger(__name__)

PIE_MAX_CATEGORIES = 12
LINE_MAX_SERIES = 6
CATEGORICAL_RATIO = 0.2
CATEGORICAL_MAX_DISTINCT = 20

_TEMPORAL_RE = re.compile(r"^\d{4}-\d{2}-\d{2}([ T]\d{2}:\d{2}(:\d{2})?)?$")

NUMERIC_KINDS = ("numeric_continuous", "numeric_discrete")


@dataclass(frozen=True)
class InferredColumn:
    name: str
    kind: str
    distinct_ratio: float
    distinct_count: int = 0


def infer_column_types(result: QueryResult) -> list[InferredColumn]:
    """One InferredColumn per result column; deterministic, unknown maps to text."""
    inferred = []
    total = len(result.rows)
    for position, (name, declared) in enumerate(result.columns):
        values = [row[position] for row in result.rows if row[position] is not None]
        distinct = len(set(values))
        ratio = distinct / total if total else 0.0
        kind = _kind_of(declared or "", values, ratio, distinct)
        inferred.append(InferredColumn(name, kind, ratio, distinct))
    return inferred


def _kind_of(declared: str, values: list, ratio: float, distinct: int) -> str:
    declared_upper = declared.upper()
    if any(tok in declared_upper for tok in ("BOOL",)):
        return "boolean"
    if any(tok in declared_upper for tok in ("DATE", "TIME")):
        return "temporal"
    if values and all(isinstance(v, bool) for v in values):
        return "boolean"
    if values and all(isinstance(v, str) and _TEMPORAL_RE.match(v) for v in values):
        return "temporal"
    is_int_decl = any(tok in declared_upper for tok in ("INT",))
    is_float_decl = any(
        tok in declared_upper for tok in ("REAL", "FLOA", "DOUB", "DECIMAL", "NUMERIC")
    )
    if values and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        if is_float_decl or any(isinstance(v, float) for v in values):
            return "numeric_continuous"
        return "numeric_discrete"
    if is_int_decl:
        return "numeric_discrete"
    if is_float_decl:
        return "numeric_continuous"
    if values and all(isinstance(v, str) for v in values):
        if ratio < CATEGORICAL_RATIO or distinct <= CATEGORICAL_MAX_DISTINCT:
            return "categorical"
        return "text"
    return "text"


def propose_charts(result: QueryResult) -> list[ChartSpec]:
    """Ordered candidates from the decision table; always ends with table."""
    columns = infer_column_types(result)
    candidates: list[ChartSpec] = []
    row_count = len(result.rows)

    def first(kinds, excluding=()):
        for col in columns:
            if col.kind in kinds and col.name not in excluding:
                return col
        return None

    if len(columns) == 2:
        label = first(("categorical",))
        value = first(NUMERIC_KINDS)
        if label and value and row_count <= PIE_MAX_CATEGORIES:
            candidates.append(ChartSpec("pie", {"label": label.name, "value": value.name}))

    if len(columns) in (2, 3):
        x = first(("temporal", "numeric_continuous"))
        if x is not None:
            y = first(NUMERIC_KINDS, excluding={x.name})
            if y is not None:
                rest = [c for c in columns if c.name not in (x.name, y.name)]
                if not rest:
                    candidates.append(ChartSpec("line", {"x": x.name, "y": y.name}))
                elif (
                    len(rest) == 1
                    and rest[0].kind == "categorical"
                    and rest[0].distinct_count <= LINE_MAX_SERIES
                ):
                    candidates.append(
                        ChartSpec("line", {"x": x.name, "y": y.name, "pivot_column": rest[0].name})
                    )

    if len(columns) in (2, 3):
        x = first(("categorical",))
        if x is not None:
            y = first(NUMERIC_KINDS, excluding={x.name})
            if y is not None:
                rest = [c for c in columns if c.name not in (x.name, y.name)]
                if not rest:
                    candidates.append(ChartSpec("bar", {"x": x.name, "y": y.name}))
                elif len(rest) == 1 and rest[0].kind == "categorical":
                    candidates.append(
                        ChartSpec("bar", {"x": x.name, "y": y.name, "pivot_column": rest[0].name})
                    )

    candidates.append(ChartSpec("table", {}))
    return candidates


class ChartEngine:
    def __init__(self, gateway: Gateway, config: PipelineConfig):
        self.gateway = gateway
        self.config = config

    def recommend_chart(self, task: ClarifiedTask, result: QueryResult) -> ChartSpec:
        """Top rule proposal, verified by one advisory model call; never fails."""
        candidates = propose_charts(result)
        proposal = candidates[0]
        if proposal.chart_type == "table" or len(candidates) == 1:
            return proposal

        alternatives = [c.chart_type for c in candidates[1:]]
        prompt = prompts.CHART_VERIFY.format(
            task=task.refined_task,
            columns=", ".join(name for name, _ in result.columns),
            proposal=json.dumps({"chart_type": proposal.chart_type, "bindings": proposal.bindings}),
            alternatives=", ".join(alternatives),
        )
        try:
            request = CompletionRequest.with_config(self.config, prompt, "chart.verify")
            verdict = parse_json_reply(self.gateway.complete(request).text, "chart verify")
        except AutoEdaError as exc:
            log.warning("chart verification unavailable, keeping rule proposal: %s", exc)
            return proposal

        if not isinstance(verdict, dict) or verdict.get("appropriate", True):
            return proposal
        alternative = verdict.get("alternative")
        for candidate in candidates[1:]:
            if candidate.chart_type == alternative:
                return candidate
        return candidates[1]
