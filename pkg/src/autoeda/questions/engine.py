"""Question clarification, decomposition, and feedback-driven few-shot capture.

Clarification reads the built data context (database summary, entities, domain
terms) and never writes to any namespace; decomposition may inject a matching
standard procedure and past well-rated examples into the prompt.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .. import prompts
from ..domain import Ambiguity, ClarifiedTask, DecompositionPlan, PipelineConfig, Subtask
from ..errors import LlmError, NoContext, UnknownArtifact
from ..hdc.builder import parse_json_reply
from ..llm.gateway import CompletionRequest, Gateway
from ..vectors.index import VectorIndex

log = logging.getLogger(__name__)

SOP_SCORE_FLOOR = 0.3
FEWSHOT_COUNT = 3
DOMAIN_TERM_COUNT = 5


@dataclass(frozen=True)
class SopDocument:
    id: str
    domain_tag: str
    steps: tuple[str, ...]


@dataclass(frozen=True)
class FewShotPair:
    id: str
    question: str
    answer_payload: str
    satisfaction_marked: bool = False


class QuestionEngine:
    def __init__(
        self,
        gateway: Gateway,
        index: VectorIndex,
        config: PipelineConfig,
        registry_path: str | Path | None = None,
    ):
        self.gateway = gateway
        self.index = index
        self.config = config
        self.registry_path = Path(registry_path) if registry_path else None
        self._registry: dict[str, dict] = {}
        if self.registry_path and self.registry_path.exists():
            self._registry = json.loads(self.registry_path.read_text(encoding="utf-8"))

    def _complete(self, prompt: str, tag: str) -> str:
        request = CompletionRequest.with_config(self.config, prompt, tag)
        return self.gateway.complete(request).text

    # -- clarification ---------------------------------------------------------

    def clarify(self, question: str, database: str = "main") -> ClarifiedTask:
        """Resolve ambiguities and abbreviations against the data context."""
        summary_doc = self.index.get("db_summary", database)
        if summary_doc is None:
            raise NoContext(
                f"no data context for database {database!r}; build it before asking questions"
            )
        entity_docs = self.index.documents("entity")
        context_lines = [f"Database: {summary_doc.text}"]
        context_lines.extend(f"Entity: {doc.text}" for doc in entity_docs)

        term_hits = self.index.search("domain_term", question, k=DOMAIN_TERM_COUNT)
        terms = "\n".join(
            f"- {h.metadata.get('term', h.id)}: {h.metadata.get('definition', '')}"
            for h in term_hits
        )
        prompt = prompts.CLARIFY.format(
            question=question,
            context="\n".join(context_lines),
            terms=terms or "(none)",
        )
        reply = self._complete(prompt, "question.clarify")
        data = parse_json_reply(reply, "clarify")

        concepts = [str(c) for c in data.get("main_concepts", [])]
        ambiguities = []
        for item in data.get("ambiguities", []):
            if not isinstance(item, dict):
                continue
            concept = str(item.get("concept", ""))
            explanation = str(item.get("explanation", ""))
            if not explanation:
                continue
            if concept not in concepts:
                concepts.append(concept)
            ambiguities.append(Ambiguity(concept, explanation))
        refined = str(data.get("refined_task", "")).strip()
        if not refined:
            raise LlmError("clarify: refined_task is empty")
        return ClarifiedTask(
            original_question=question,
            main_concepts=tuple(concepts),
            ambiguities=tuple(ambiguities),
            refined_task=refined,
            detailed_description=str(data.get("detailed_description", "")),
        )

    # -- decomposition ------------------------------------------------------------

    def decompose(self, clarified: ClarifiedTask) -> DecompositionPlan:
        """Decide single-SQL answerability and, when needed, order sub-questions."""
        sop_block = self._sop_block(clarified.refined_task)
        fewshot_block = self._fewshot_block(clarified.refined_task)
        prompt = prompts.DECOMPOSE.format(
            refined_task=clarified.refined_task,
            detailed_description=clarified.detailed_description,
            sop_block=sop_block,
            fewshot_block=fewshot_block,
        )
        reply = self._complete(prompt, "question.decompose")
        data = parse_json_reply(reply, "decompose")

        single = bool(data.get("single_sql_answerable", True))
        subtasks: list[Subtask] = []
        seen = set()
        for item in data.get("subtasks", []):
            if not isinstance(item, dict):
                continue
            description = str(item.get("description", "")).strip()
            if not description or description in seen:
                continue
            seen.add(description)
            subtasks.append(Subtask(description, str(item.get("detail", ""))))
        # Normalize to the plan invariant: the flag must match the subtask list.
        if single and subtasks:
            log.info("plan said single-SQL but carried %d subtasks; dropping them", len(subtasks))
            subtasks = []
        if not single and not subtasks:
            log.info("plan said multi-SQL but had no subtasks; treating as single-SQL")
            single = True
        return DecompositionPlan(parent=clarified, single_sql_answerable=single, subtasks=tuple(subtasks))

    def _sop_block(self, task_text: str) -> str:
        hits = self.index.search("sop", task_text, k=1)
        if not hits or hits[0].score < SOP_SCORE_FLOOR:
            return ""
        steps = json.loads(hits[0].metadata.get("steps", "[]"))
        lines = "\n".join(f"{i + 1}. {step}" for i, step in enumerate(steps))
        return f"Standard operating procedure ({hits[0].metadata.get('domain_tag', '')}):\n{lines}\n"

    def _fewshot_block(self, task_text: str) -> str:
        hits = self.index.search("fewshot_sql", task_text, k=FEWSHOT_COUNT)
        if not hits:
            return ""
        lines = []
        for hit in hits:
            doc = self.index.get("fewshot_sql", hit.id)
            payload = hit.metadata.get("answer_payload", "")
            lines.append(f"Q: {doc.text if doc else hit.id}\nA: {payload}")
        return "Examples rated well by users:\n" + "\n".join(lines) + "\n"

    # -- knowledge ingestion ---------------------------------------------------------

    def ingest_domain_terms(self, records) -> int:
        count = 0
        for record in records:
            term = str(record["term"])
            definition = str(record.get("definition", ""))
            self.index.add(
                "domain_term", term, f"{term}: {definition}", {"term": term, "definition": definition}
            )
            count += 1
        return count

    def ingest_sops(self, records) -> int:
        count = 0
        for record in records:
            steps = [str(s) for s in record.get("steps", [])]
            if not steps:
                raise ValueError("SOP record must have non-empty steps")
            domain_tag = str(record.get("domain_tag", ""))
            sop_id = str(record.get("id") or f"sop-{domain_tag or count}")
            self.index.add(
                "sop",
                sop_id,
                record.get("text") or f"{domain_tag}: " + " ".join(steps),
                {"domain_tag": domain_tag, "steps": json.dumps(steps)},
            )
            count += 1
        return count

    # -- feedback ---------------------------------------------------------------------

    def register_artifact(self, artifact_id: str, question: str, answer_payload: str, kind: str) -> None:
        """Make a plan or SQL artifact addressable for later feedback."""
        self._registry[artifact_id] = {
            "question": question,
            "answer_payload": answer_payload,
            "kind": kind,
            "satisfied": None,
        }
        self._save_registry()

    def record_feedback(self, artifact_id: str, satisfied: bool) -> None:
        entry = self._registry.get(artifact_id)
        if entry is None:
            raise UnknownArtifact(f"no artifact registered under id {artifact_id!r}")
        entry["satisfied"] = bool(satisfied)
        self._save_registry()
        if satisfied:
            # Idempotent: re-marking upserts the same (namespace, id) document.
            self.index.add(
                "fewshot_sql",
                artifact_id,
                entry["question"],
                {
                    "answer_payload": entry["answer_payload"],
                    "kind": entry["kind"],
                    "satisfaction": "true",
                },
            )

    def known_artifact(self, artifact_id: str) -> bool:
        return artifact_id in self._registry

    def _save_registry(self) -> None:
        if self.registry_path:
            self.registry_path.parent.mkdir(parents=True, exist_ok=True)
            self.registry_path.write_text(
                json.dumps(self._registry, indent=1, sort_keys=True), encoding="utf-8"
            )
