"""Uniform completion interface with token/cost accounting and retries."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Callable

from ..domain import PipelineConfig
from ..errors import ContextOverflow, MalformedResponse, ProviderUnavailable
from .tokens import heuristic_token_count

log = logging.getLogger(__name__)

# Meaningful column-batch prompts need at least this many tokens per column.
MIN_TOKENS_PER_COLUMN = 8


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    max_output_tokens: int = 1024
    temperature: float = 0.0
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    tag: str = ""

    @classmethod
    def with_config(cls, config: PipelineConfig, prompt: str, tag: str, max_output_tokens: int = 1024):
        return cls(
            prompt=prompt,
            max_output_tokens=max_output_tokens,
            temperature=config.temperature,
            top_p=config.top_p,
            tag=tag,
        )


@dataclass(frozen=True)
class CompletionResult:
    text: str
    input_tokens: int
    output_tokens: int
    provider: str
    latency_ms: int


@dataclass(frozen=True)
class ProviderProfile:
    name: str
    context_window_tokens: int = 16000
    column_group_size: int | None = None
    price_per_1m_input: float = 0.0
    price_per_1m_output: float = 0.0

    def check(self) -> list[str]:
        problems = []
        if self.context_window_tokens < 1:
            problems.append("context_window_tokens must be >= 1")
        if self.column_group_size is not None:
            bound = self.context_window_tokens // MIN_TOKENS_PER_COLUMN
            if self.column_group_size >= bound:
                problems.append(
                    f"column_group_size {self.column_group_size} exceeds the "
                    f"context-window bound {bound}"
                )
        return problems


@dataclass
class Counters:
    calls: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    cost_usd: float = 0.0

    def add(self, other: "Counters") -> None:
        self.calls += other.calls
        self.input_tokens += other.input_tokens
        self.output_tokens += other.output_tokens
        self.cost_usd += other.cost_usd

    def as_dict(self) -> dict:
        return {
            "calls": self.calls,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "cost_usd": round(self.cost_usd, 6),
        }


class Gateway:
    """Completion front door: budget precondition, retries, per-tag counters.

    Safe for concurrent callers; counter updates take an internal lock and the
    provider is expected to be stateless or internally synchronized.
    """

    RETRIES_UNAVAILABLE = 3
    RETRIES_MALFORMED = 1

    def __init__(
        self,
        provider,
        profile: ProviderProfile | None = None,
        tokenizer: Callable[[str], int] | None = None,
        backoff_base_s: float = 0.5,
    ):
        self.provider = provider
        self.profile = profile or ProviderProfile(name=getattr(provider, "name", "unknown"))
        self.count_tokens = tokenizer or heuristic_token_count
        self.backoff_base_s = backoff_base_s
        self._lock = threading.Lock()
        self._by_tag: dict[str, Counters] = {}
        self._total = Counters()

    def complete(self, request: CompletionRequest) -> CompletionResult:
        input_tokens = self.count_tokens(request.prompt)
        window = self.profile.context_window_tokens
        if input_tokens + request.max_output_tokens > window:
            raise ContextOverflow(
                f"prompt ({input_tokens} tokens) + max_output ({request.max_output_tokens}) "
                f"exceeds context window {window}"
            )

        started = time.monotonic()
        text, reported_output = self._call_with_retries(request)
        latency_ms = int((time.monotonic() - started) * 1000)

        output_tokens = reported_output if reported_output is not None else self.count_tokens(text)
        delta = Counters(
            calls=1,
            input_tokens=input_tokens,
            output_tokens=output_tokens,
            cost_usd=(
                input_tokens * self.profile.price_per_1m_input
                + output_tokens * self.profile.price_per_1m_output
            )
            / 1_000_000,
        )
        with self._lock:
            self._by_tag.setdefault(request.tag, Counters()).add(delta)
            self._total.add(delta)

        return CompletionResult(
            text=text,
            input_tokens=input_tokens,
            output_tokens=output_tokens,
            provider=self.profile.name,
            latency_ms=latency_ms,
        )

    def _call_with_retries(self, request: CompletionRequest) -> tuple[str, int | None]:
        unavailable_left = self.RETRIES_UNAVAILABLE
        malformed_left = self.RETRIES_MALFORMED
        attempt = 0
        while True:
            try:
                return self.provider.generate(request.prompt, request)
            except ProviderUnavailable:
                if unavailable_left == 0:
                    raise
                unavailable_left -= 1
            except MalformedResponse:
                if malformed_left == 0:
                    raise
                malformed_left -= 1
            delay = self.backoff_base_s * (2**attempt)
            attempt += 1
            log.warning("provider %s retry in %.2fs (%s)", self.profile.name, delay, request.tag)
            if delay:
                time.sleep(delay)

    def counters(self, tag: str) -> Counters:
        with self._lock:
            got = self._by_tag.get(tag, Counters())
            return replace_counters(got)

    def counters_by_tag(self) -> dict[str, Counters]:
        with self._lock:
            return {tag: replace_counters(c) for tag, c in self._by_tag.items()}

    def totals(self) -> Counters:
        with self._lock:
            return replace_counters(self._total)


def replace_counters(c: Counters) -> Counters:
    return Counters(c.calls, c.input_tokens, c.output_tokens, c.cost_usd)
