"""Exception hierarchy shared across the pipeline."""


class KbForgeError(Exception):
    """Base class for all kbforge errors."""


class LabelError(KbForgeError):
    """A label is empty or otherwise unusable after normalization."""


class TemplateError(KbForgeError):
    """Unknown template/schema id, or a required placeholder is missing."""


class BudgetExceededError(KbForgeError):
    """The cost ledger crossed its budget cap; no further requests are sent."""


class BatchSizeError(KbForgeError):
    """A batch submission violates the configured size limits."""


class UnknownHandleError(KbForgeError):
    """poll_batch was called with a handle this gateway never issued."""


class ProviderError(KbForgeError):
    """The provider failed in a way retries could not fix."""


class TransportError(ProviderError):
    """A transient transport-level failure; eligible for retry."""


class CheckpointError(KbForgeError):
    """A crawl checkpoint is corrupt or inconsistent with the requested crawl."""


class CoverageError(KbForgeError):
    """A cluster map does not cover every raw name it is applied to."""


class TtlParseError(KbForgeError):
    """A TTL document line could not be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DependencyError(KbForgeError):
    """A pipeline stage was run before one of its prerequisites."""


class StateLockedError(KbForgeError):
    """Another pipeline instance holds the state directory lock."""
