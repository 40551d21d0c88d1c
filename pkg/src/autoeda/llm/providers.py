"""Completion providers: deterministic scripted doubles and a real HTTP backend."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable

import httpx

from ..errors import MalformedResponse, ProviderUnavailable, UnmatchedPrompt


@dataclass(frozen=True)
class ScriptedRule:
    """Ordered pattern rule: first rule whose ``contains`` is in the prompt wins."""

    contains: str
    response: str
    output_tokens: int | None = None


class ScriptedProvider:
    """Deterministic test double replaying (pattern -> response) rules.

    The rule table is read-only after construction, so the provider is safe to
    call from many threads. In strict mode an unmatched prompt raises, which
    catches prompt drift in tests; otherwise ``default`` (a callable on the
    prompt text) answers unmatched prompts.
    """

    name = "scripted"

    def __init__(
        self,
        rules: list[ScriptedRule] | None = None,
        strict: bool = True,
        default: Callable[[str], str] | None = None,
    ):
        self.rules = tuple(rules or ())
        self.strict = strict
        self.default = default

    @classmethod
    def from_file(cls, path: str) -> "ScriptedProvider":
        """Load a fixture file: {"strict": bool, "rules": [{"contains", "response", "output_tokens"?}]}."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        rules = [
            ScriptedRule(r["contains"], r["response"], r.get("output_tokens"))
            for r in data.get("rules", [])
        ]
        return cls(rules, strict=data.get("strict", True))

    def generate(self, prompt: str, request) -> tuple[str, int | None]:
        for rule in self.rules:
            if rule.contains in prompt:
                return rule.response, rule.output_tokens
        if self.default is not None:
            return self.default(prompt), None
        if self.strict:
            head = prompt[:200].replace("\n", "\\n")
            raise UnmatchedPrompt(f"no scripted rule matches prompt: {head!r}...")
        return "", None


class HttpChatProvider:
    """Chat-completion HTTP backend (OpenAI-style wire shape).

    The API key is read from the environment variable named in the profile
    config, never stored in files.
    """

    def __init__(
        self,
        name: str,
        endpoint: str,
        model: str,
        api_key_env: str = "AUTOEDA_API_KEY",
        timeout_s: float = 60.0,
    ):
        self.name = name
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s

    def generate(self, prompt: str, request) -> tuple[str, int | None]:
        api_key = os.environ.get(self.api_key_env, "")
        if not api_key:
            raise ProviderUnavailable(f"API key env {self.api_key_env} is not set")
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "frequency_penalty": request.frequency_penalty,
            "presence_penalty": request.presence_penalty,
        }
        try:
            resp = httpx.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout_s,
            )
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"{self.name}: {exc}") from exc
        if resp.status_code in (429,) or resp.status_code >= 500:
            raise ProviderUnavailable(f"{self.name}: HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise MalformedResponse(f"{self.name}: HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
            usage = body.get("usage", {})
            output_tokens = usage.get("completion_tokens")
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"{self.name}: unparsable completion payload") from exc
        return text, output_tokens
