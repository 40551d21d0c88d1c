"""Text embedding backends: a deterministic offline stub and an HTTP client."""

from __future__ import annotations

import hashlib
import os
import threading

import httpx
import numpy as np

from ..errors import ProviderUnavailable


class StubEmbedder:
    """Seeded pseudo-random unit vector per distinct text, cached.

    Vectors are derived from sha256 streams, so identical text yields an
    identical vector on every platform and run. Preserves nothing semantic:
    exact-duplicate detection only, which is all deterministic tests need.
    """

    def __init__(self, dim: int = 64):
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        with self._lock:
            cached = self._cache.get(text)
            if cached is not None:
                return cached
        seed = hashlib.sha256(text.encode("utf-8")).digest()
        values: list[float] = []
        counter = 0
        while len(values) < self.dim:
            block = hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
            for i in range(0, 32, 8):
                chunk = int.from_bytes(block[i : i + 8], "big")
                values.append(chunk / 2**64 * 2.0 - 1.0)
            counter += 1
        vector = np.asarray(values[: self.dim], dtype=np.float64)
        vector /= np.linalg.norm(vector)
        with self._lock:
            self._cache[text] = vector
        return vector


class HttpEmbedder:
    """Embedding-endpoint client (OpenAI-style wire shape)."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        dim: int,
        api_key_env: str = "AUTOEDA_API_KEY",
        timeout_s: float = 30.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        api_key = os.environ.get(self.api_key_env, "")
        if not api_key:
            raise ProviderUnavailable(f"API key env {self.api_key_env} is not set")
        try:
            resp = httpx.post(
                self.endpoint,
                json={"input": text, "model": self.model},
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            vector = np.asarray(resp.json()["data"][0]["embedding"], dtype=np.float64)
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProviderUnavailable(f"embedding endpoint failed: {exc}") from exc
        return vector
