"""End-to-end orchestration: datasource registry, context builds, question runs.

A workspace is a directory holding the datasource registry, per-datasource
introspection snapshots, vector index files, built artifacts, and feedback
registries. Question runs are deterministic given the same workspace and a
scripted provider: artifact ids are content hashes, not random.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .charts.engine import ChartEngine
from .db.factory import make_adapter
from .db.types import SchemaSnapshot
from .domain import PipelineConfig, to_json_dict
from .errors import NoContext
from .hdc.builder import HdcBuilder
from .llm.gateway import Gateway
from .questions.engine import QuestionEngine
from .sqlgen.engine import SqlEngine
from .vectors.embedding import StubEmbedder
from .vectors.index import VectorIndex

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Datasource:
    id: str
    target: str
    name: str
    root: Path

    @property
    def snapshot_path(self) -> Path:
        return self.root / "snapshot.json"

    @property
    def index_dir(self) -> Path:
        return self.root / "index"

    @property
    def artifacts_path(self) -> Path:
        return self.root / "artifacts.json"

    @property
    def report_path(self) -> Path:
        return self.root / "build_report.json"

    @property
    def registry_path(self) -> Path:
        return self.root / "feedback.json"

    def open_adapter(self):
        return make_adapter(self.target)

    def load_snapshot(self) -> SchemaSnapshot:
        return SchemaSnapshot.from_json_dict(json.loads(self.snapshot_path.read_text()))

    def hdc_ready(self) -> bool:
        return self.artifacts_path.exists()

    def load_artifacts(self) -> dict:
        return json.loads(self.artifacts_path.read_text(encoding="utf-8"))


class Workspace:
    def __init__(self, root: str | Path, config: PipelineConfig | None = None, embedder=None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.config = config or PipelineConfig()
        self.embedder = embedder or StubEmbedder(dim=64)
        self.registry_file = self.root / "registry.json"

    # -- datasource registry ------------------------------------------------------

    def ingest(self, target: str, name: str | None = None) -> Datasource:
        """Register a datasource and store its introspection snapshot.

        Idempotent: the id is a stable hash of the connection target.
        """
        ds_id = hashlib.sha1(target.encode("utf-8")).hexdigest()[:12]
        ds = Datasource(ds_id, target, name or ds_id, self.root / "datasources" / ds_id)
        adapter = make_adapter(target)
        try:
            snapshot = adapter.introspect()
        finally:
            adapter.close()
        ds.root.mkdir(parents=True, exist_ok=True)
        ds.snapshot_path.write_text(
            json.dumps(snapshot.to_json_dict(), indent=1, sort_keys=True), encoding="utf-8"
        )
        registry = self._read_registry()
        registry[ds_id] = {"target": target, "name": ds.name}
        self.registry_file.write_text(json.dumps(registry, indent=1, sort_keys=True), encoding="utf-8")
        return ds

    def datasource(self, ds_id: str) -> Datasource:
        registry = self._read_registry()
        if ds_id not in registry:
            raise NoContext(f"unknown datasource {ds_id!r}; ingest it first")
        entry = registry[ds_id]
        return Datasource(ds_id, entry["target"], entry["name"], self.root / "datasources" / ds_id)

    def list_datasources(self) -> dict:
        return self._read_registry()

    def _read_registry(self) -> dict:
        if self.registry_file.exists():
            return json.loads(self.registry_file.read_text(encoding="utf-8"))
        return {}

    def open_index(self, ds: Datasource) -> VectorIndex:
        return VectorIndex(self.embedder, root=ds.index_dir)

    # -- context build ---------------------------------------------------------------

    def build_hdc(self, ds: Datasource, gateway: Gateway, parallelism: int = 1) -> dict:
        """Run the full context build, persisting artifacts, index, and report."""
        adapter = ds.open_adapter()
        try:
            index = self.open_index(ds)
            builder = HdcBuilder(adapter, gateway, index, self.config, database="main")
            bundle = builder.build(parallelism=parallelism)
            index.compact()
            ds.artifacts_path.write_text(
                json.dumps(bundle, indent=1, sort_keys=True), encoding="utf-8"
            )
            report = builder.report.to_json_dict()
            ds.report_path.write_text(json.dumps(report, indent=1, sort_keys=True), encoding="utf-8")
            return report
        finally:
            adapter.close()

    # -- question run -----------------------------------------------------------------

    def ask(
        self, ds: Datasource, gateway: Gateway, question: str, prompt_dump_dir=None
    ) -> dict:
        """Full question pipeline: clarify, decompose, SQL per subtask, charts."""
        if not ds.hdc_ready():
            raise NoContext(f"datasource {ds.id} has no built context yet")
        index = self.open_index(ds)
        adapter = ds.open_adapter()
        try:
            questions = QuestionEngine(gateway, index, self.config, registry_path=ds.registry_path)
            clarified = questions.clarify(question)
            plan = questions.decompose(clarified)

            sql_engine = SqlEngine(
                gateway, index, adapter, ds.load_snapshot(), self.config,
                prompt_dump_dir=prompt_dump_dir,
            )
            artifacts = sql_engine.run_subtasks(plan)

            charts = ChartEngine(gateway, self.config)
            chart_specs = []
            for artifact in artifacts:
                if artifact.status == "executed" and artifact.result_preview is not None:
                    from .db.types import QueryResult

                    preview = artifact.result_preview
                    result = QueryResult(
                        tuple((name, "") for name in preview.columns), preview.rows
                    )
                    chart_specs.append(to_json_dict(charts.recommend_chart(artifact.task, result)))
                else:
                    chart_specs.append(None)

            run_key = f"{ds.id}:{question}"
            plan_id = "plan-" + hashlib.sha1(run_key.encode("utf-8")).hexdigest()[:12]
            questions.register_artifact(
                plan_id, question, json.dumps(to_json_dict(plan), sort_keys=True), "plan"
            )
            artifact_ids = []
            for position, artifact in enumerate(artifacts):
                artifact_id = (
                    "sql-" + hashlib.sha1(f"{run_key}:{position}".encode("utf-8")).hexdigest()[:12]
                )
                artifact_ids.append(artifact_id)
                questions.register_artifact(
                    artifact_id, artifact.task.refined_task, artifact.sql, "sql"
                )

            return {
                "datasource_id": ds.id,
                "question": question,
                "clarified_task": to_json_dict(clarified),
                "plan": to_json_dict(plan),
                "plan_id": plan_id,
                "artifacts": [to_json_dict(a) for a in artifacts],
                "artifact_ids": artifact_ids,
                "charts": chart_specs,
                "answerable": any(a.status == "executed" for a in artifacts),
            }
        finally:
            adapter.close()

    # -- knowledge + feedback ------------------------------------------------------------

    def question_engine(self, ds: Datasource, gateway: Gateway) -> QuestionEngine:
        return QuestionEngine(
            gateway, self.open_index(ds), self.config, registry_path=ds.registry_path
        )

    def suggestions(self, ds: Datasource) -> list[dict]:
        if not ds.hdc_ready():
            raise NoContext(f"datasource {ds.id} has no built context yet")
        return ds.load_artifacts()["suggested_questions"]
