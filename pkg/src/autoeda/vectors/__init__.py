from .embedding import HttpEmbedder, StubEmbedder
from .index import NAMESPACES, IndexedDocument, SearchHit, VectorIndex

__all__ = [
    "HttpEmbedder",
    "StubEmbedder",
    "NAMESPACES",
    "IndexedDocument",
    "SearchHit",
    "VectorIndex",
]
