"""Token counting for prompt budgeting.

Budget checks only need a safe upper bound, so the default is a conservative
heuristic: one token per three characters, rounded up. A provider-supplied
tokenizer can replace it where exact counts matter. Both must be deterministic
and monotone under concatenation: count(a + b) >= max(count(a), count(b)).
"""

from __future__ import annotations


def heuristic_token_count(text: str) -> int:
    """Conservative token estimate: ceil(len(text) / 3)."""
    return -(-len(text) // 3)
