"""Namespaced, persistent, exact cosine-similarity index.

Exact scan by design: corpora are thousands of documents, so correctness and
testability beat ANN structures. On disk each namespace is one append-only
JSON-lines file with a versioned header; a compaction pass rewrites it with
the latest record per id.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatch

NAMESPACES = (
    "column_desc",
    "table_desc",
    "table_rel",
    "entity",
    "db_summary",
    "domain_term",
    "fewshot_sql",
    "sop",
)

FORMAT_NAME = "autoeda-index"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class IndexedDocument:
    namespace: str
    id: str
    text: str
    vector: tuple[float, ...]
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SearchHit:
    id: str
    score: float
    metadata: dict


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity with a zero-norm guard: degenerate vectors score 0."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


class VectorIndex:
    """Exact top-k cosine index over namespaced documents.

    ``root=None`` keeps everything in memory (tests); otherwise each namespace
    persists to ``root/<namespace>.jsonl``. Writes are serialized per index;
    searches snapshot under the same lock so they never observe a torn state.
    """

    def __init__(self, embedder, root: str | Path | None = None):
        self.embedder = embedder
        self.dim = embedder.dim
        self.root = Path(root) if root is not None else None
        self._lock = threading.RLock()
        self._docs: dict[str, dict[str, IndexedDocument]] = {}
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            self._load_all()

    # -- embedding ---------------------------------------------------------

    def embed(self, text: str) -> np.ndarray:
        return self.embedder.embed(text)

    # -- write path ----------------------------------------------------------

    def add(self, namespace: str, doc_id: str, text: str, metadata: dict | None = None) -> IndexedDocument:
        """Embed ``text`` and upsert it under (namespace, doc_id)."""
        vector = tuple(float(x) for x in self.embed(text))
        doc = IndexedDocument(namespace, doc_id, text, vector, dict(metadata or {}))
        self.upsert(doc)
        return doc

    def upsert(self, doc: IndexedDocument) -> None:
        if len(doc.vector) != self.dim:
            raise DimensionMismatch(
                f"vector of length {len(doc.vector)} does not match index dim {self.dim}"
            )
        with self._lock:
            self._docs.setdefault(doc.namespace, {})[doc.id] = doc
            if self.root is not None:
                self._append_record(doc)

    # -- read path -----------------------------------------------------------

    def search(self, namespace: str, query_text: str, k: int) -> list[SearchHit]:
        """Exact top-k by cosine over the namespace; empty namespace yields []."""
        if k < 1:
            raise ValueError("k must be >= 1")
        with self._lock:
            docs = list(self._docs.get(namespace, {}).values())
        if not docs:
            return []
        query = np.asarray(self.embed(query_text), dtype=np.float64)
        return self._rank(docs, query, k)

    def search_vector(self, namespace: str, vector, k: int) -> list[SearchHit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        with self._lock:
            docs = list(self._docs.get(namespace, {}).values())
        if not docs:
            return []
        return self._rank(docs, np.asarray(vector, dtype=np.float64), k)

    @staticmethod
    def _rank(docs: list[IndexedDocument], query: np.ndarray, k: int) -> list[SearchHit]:
        scored = [
            (cosine(query, np.asarray(d.vector, dtype=np.float64)), d) for d in docs
        ]
        scored.sort(key=lambda pair: (-pair[0], pair[1].id))
        return [SearchHit(d.id, score, dict(d.metadata)) for score, d in scored[:k]]

    def get(self, namespace: str, doc_id: str) -> IndexedDocument | None:
        with self._lock:
            return self._docs.get(namespace, {}).get(doc_id)

    def documents(self, namespace: str) -> list[IndexedDocument]:
        with self._lock:
            return sorted(self._docs.get(namespace, {}).values(), key=lambda d: d.id)

    def count(self, namespace: str) -> int:
        with self._lock:
            return len(self._docs.get(namespace, {}))

    # -- persistence ---------------------------------------------------------

    def compact(self) -> None:
        """Rewrite every namespace file with one record per id, sorted by id."""
        if self.root is None:
            return
        with self._lock:
            for namespace, docs in self._docs.items():
                path = self._path(namespace)
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(self._header_line(namespace))
                    for doc_id in sorted(docs):
                        fh.write(self._record_line(docs[doc_id]))

    def _path(self, namespace: str) -> Path:
        return self.root / f"{namespace}.jsonl"

    def _header_line(self, namespace: str) -> str:
        header = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "namespace": namespace,
            "dim": self.dim,
        }
        return json.dumps(header, sort_keys=True) + "\n"

    def _record_line(self, doc: IndexedDocument) -> str:
        record = {
            "id": doc.id,
            "text": doc.text,
            "vector": list(doc.vector),
            "metadata": doc.metadata,
        }
        return json.dumps(record, sort_keys=True) + "\n"

    def _append_record(self, doc: IndexedDocument) -> None:
        path = self._path(doc.namespace)
        new_file = not path.exists()
        with open(path, "a", encoding="utf-8") as fh:
            if new_file:
                fh.write(self._header_line(doc.namespace))
            fh.write(self._record_line(doc))

    def _load_all(self) -> None:
        for path in sorted(self.root.glob("*.jsonl")):
            namespace = path.stem
            with open(path, encoding="utf-8") as fh:
                header_line = fh.readline()
                if not header_line:
                    continue
                header = json.loads(header_line)
                if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
                    raise ValueError(f"unrecognized index file header in {path}")
                if header.get("dim") != self.dim:
                    raise DimensionMismatch(
                        f"{path}: stored dim {header.get('dim')} != embedder dim {self.dim}"
                    )
                docs = self._docs.setdefault(namespace, {})
                for line in fh:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    docs[rec["id"]] = IndexedDocument(
                        namespace=namespace,
                        id=rec["id"],
                        text=rec["text"],
                        vector=tuple(rec["vector"]),
                        metadata=rec.get("metadata", {}),
                    )
