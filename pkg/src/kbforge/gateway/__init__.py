"""LLM access layer: prompt templates, providers, batching, cost tracking."""

from kbforge.gateway.gateway import BatchHandle, BatchStatus, GatewayConfig, LlmGateway
from kbforge.gateway.ledger import CostLedger
from kbforge.gateway.providers import (
    HttpChatProvider,
    MockProvider,
    ProviderReply,
    RecordingProvider,
    ScriptedWorld,
)
from kbforge.gateway.templates import (
    PromptRequest,
    StructuredResponse,
    TemplateId,
    render,
    request_for,
    validate_payload,
)

__all__ = [
    "BatchHandle",
    "BatchStatus",
    "CostLedger",
    "GatewayConfig",
    "HttpChatProvider",
    "LlmGateway",
    "MockProvider",
    "PromptRequest",
    "ProviderReply",
    "RecordingProvider",
    "ScriptedWorld",
    "StructuredResponse",
    "TemplateId",
    "render",
    "request_for",
    "validate_payload",
]
