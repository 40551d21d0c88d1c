"""Config-file loading: pipeline parameters, provider profiles, embedding."""

from __future__ import annotations

import json
from pathlib import Path

import yaml

from .domain import PipelineConfig, validate
from .errors import AutoEdaError
from .llm.gateway import Gateway, ProviderProfile
from .llm.providers import HttpChatProvider, ScriptedProvider
from .vectors.embedding import HttpEmbedder, StubEmbedder


class ConfigError(AutoEdaError):
    pass


def load_config_file(path: str | Path | None) -> dict:
    if path is None:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        return json.loads(text)
    return yaml.safe_load(text) or {}


def pipeline_config(raw: dict) -> PipelineConfig:
    section = raw.get("pipeline", {})
    known = {f for f in PipelineConfig.__dataclass_fields__}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown pipeline settings: {sorted(unknown)}")
    config = PipelineConfig(**section)
    problems = validate(config)
    if problems:
        raise ConfigError("; ".join(problems))
    return config


def make_embedder(raw: dict):
    section = raw.get("embedding", {})
    mode = section.get("mode", "stub")
    dim = int(section.get("dim", 64))
    if mode == "stub":
        return StubEmbedder(dim=dim)
    if mode == "http":
        return HttpEmbedder(
            endpoint=section["endpoint"],
            model=section.get("model", ""),
            dim=dim,
            api_key_env=section.get("api_key_env", "AUTOEDA_API_KEY"),
        )
    raise ConfigError(f"unknown embedding mode {mode!r}")


def make_gateway(provider_spec: str, raw_config: dict) -> Gateway:
    """Build the gateway for a provider flag: ``scripted:<rules.json>`` or ``http:<name>``."""
    if ":" not in provider_spec:
        raise ConfigError("provider must look like scripted:<rules-file> or http:<profile-name>")
    kind, _, arg = provider_spec.partition(":")
    if kind == "scripted":
        provider = ScriptedProvider.from_file(arg)
        profile = ProviderProfile(name="scripted", context_window_tokens=100_000)
        return Gateway(provider, profile, backoff_base_s=0.0)
    if kind == "http":
        for entry in raw_config.get("providers", []):
            if entry.get("name") == arg:
                profile = ProviderProfile(
                    name=arg,
                    context_window_tokens=int(entry.get("context_window_tokens", 16000)),
                    column_group_size=entry.get("column_group_size"),
                    price_per_1m_input=float(entry.get("price_per_1m_input", 0.0)),
                    price_per_1m_output=float(entry.get("price_per_1m_output", 0.0)),
                )
                problems = profile.check()
                if problems:
                    raise ConfigError("; ".join(problems))
                provider = HttpChatProvider(
                    name=arg,
                    endpoint=entry["endpoint"],
                    model=entry.get("model", arg),
                    api_key_env=entry.get("api_key_env", "AUTOEDA_API_KEY"),
                )
                return Gateway(provider, profile)
        raise ConfigError(f"no provider profile named {arg!r} in the config file")
    raise ConfigError(f"unknown provider kind {kind!r}")
