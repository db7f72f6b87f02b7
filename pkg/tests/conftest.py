"""Shared builders for the test suite.

Most tests construct small worlds or stores by hand; the helpers here
cut the boilerplate for the common shapes (a triple with provenance, an
elicitation result, a gateway wired to a scripted world with retries
sped up to zero delay).
"""

from __future__ import annotations

from kbforge.gateway import GatewayConfig, LlmGateway, MockProvider
from kbforge.gateway.providers import ScriptedWorld
from kbforge.kbstore import KnowledgeBase
from kbforge.model import ElicitationResult, ObjectKind, ParseStatus, Provenance, Triple


def mk_triple(
    subject: str,
    predicate: str,
    obj: str,
    kind: ObjectKind = ObjectKind.NAMED_ENTITY,
    layer: int = 1,
    batch: str = "L1.0",
    model: str = "scripted-mock",
    predicate_canonical: str | None = None,
    object_canonical: str | None = None,
) -> Triple:
    return Triple(
        subject=subject,
        predicate_raw=predicate,
        object_value=obj,
        object_kind=kind,
        provenance=Provenance(layer=layer, batch_id=batch, model_id=model),
        predicate_canonical=predicate_canonical,
        object_canonical=object_canonical,
    )


def mk_result(
    subject: str,
    rows: list[tuple[str, str, ObjectKind]],
    has_instance_of: bool = False,
    parse_status: ParseStatus = ParseStatus.OK,
    layer: int = 1,
    batch: str = "L1.0",
) -> ElicitationResult:
    triples = [
        mk_triple(subject, p, o, kind=k, layer=layer, batch=batch) for p, o, k in rows
    ]
    return ElicitationResult(
        subject=subject,
        triples=triples,
        has_instance_of=has_instance_of,
        parse_status=parse_status,
    )


def kb_with(results: list[ElicitationResult], depth: int = 1) -> KnowledgeBase:
    kb = KnowledgeBase()
    for result in results:
        kb.insert_triples(result, depth=depth)
    return kb


def scripted_gateway(world: ScriptedWorld, **overrides) -> LlmGateway:
    kwargs = dict(retry_base_delay=0.0)
    kwargs.update(overrides)
    return LlmGateway(MockProvider(world), GatewayConfig(**kwargs))
