"""Exception taxonomy shared across the pipeline."""

from __future__ import annotations


class AutoEdaError(Exception):
    """Base class for all pipeline errors."""


class ContextOverflow(AutoEdaError):
    """Prompt + output budget exceeds the provider context window.

    Signals a budgeting bug upstream: callers must size prompts before calling.
    """


class ProviderUnavailable(AutoEdaError):
    """Network/auth failure talking to a provider. Retriable."""


class MalformedResponse(AutoEdaError):
    """Provider returned a payload that cannot be parsed."""


class UnmatchedPrompt(AutoEdaError):
    """Strict scripted provider received a prompt matching no rule."""


class LlmError(AutoEdaError):
    """A pipeline stage could not use the model output (bad content)."""


class BudgetError(AutoEdaError):
    """A prompt cannot be built within the configured token budget."""


class ValidationError(AutoEdaError):
    """Model output still violates an invariant after corrective re-prompting."""


class NoContext(AutoEdaError):
    """Operation requires a built data context that does not exist."""


class UnknownArtifact(AutoEdaError):
    """Feedback referenced an artifact id that was never registered."""


class EmptySubset(AutoEdaError):
    """Schema filtering found no relevant tables for the task."""


class OutOfSubsetReference(AutoEdaError):
    """Generated SQL references identifiers outside the filtered subset."""


class RefinementExhausted(AutoEdaError):
    """The refinement chain ran out of rounds without a runnable statement."""

    def __init__(self, message: str, trace=(), final_error: str = ""):
        super().__init__(message)
        self.trace = tuple(trace)
        self.final_error = final_error


class ConnectionFailed(AutoEdaError):
    """Could not reach or open the target database."""


class UnknownTable(AutoEdaError):
    """Requested table does not exist in the target database."""


class NonReadOnlyStatement(AutoEdaError):
    """Statement rejected by the read-only allowlist."""


class EngineError(AutoEdaError):
    """SQL failed inside the database engine; feeds the refinement chain."""

    def __init__(self, error_text: str, error_class: str = "other"):
        super().__init__(error_text)
        self.error_text = error_text
        self.error_class = error_class


class DimensionMismatch(AutoEdaError):
    """Document vector length differs from the index dimension."""
