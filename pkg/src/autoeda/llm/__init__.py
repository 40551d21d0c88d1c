from .gateway import CompletionRequest, CompletionResult, Counters, Gateway, ProviderProfile
from .providers import HttpChatProvider, ScriptedProvider, ScriptedRule
from .tokens import heuristic_token_count

__all__ = [
    "CompletionRequest",
    "CompletionResult",
    "Counters",
    "Gateway",
    "ProviderProfile",
    "HttpChatProvider",
    "ScriptedProvider",
    "ScriptedRule",
    "heuristic_token_count",
]
