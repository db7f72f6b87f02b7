"""Gateway behaviour: templates, schemas, retries, batching, budget."""

from __future__ import annotations

import json
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import scripted_gateway
from kbforge.errors import (
    BatchSizeError,
    BudgetExceededError,
    ProviderError,
    TemplateError,
    TransportError,
    UnknownHandleError,
)
from kbforge.gateway import (
    BatchStatus,
    CostLedger,
    GatewayConfig,
    LlmGateway,
    MockProvider,
    PromptRequest,
    ProviderReply,
    RecordingProvider,
    ScriptedWorld,
    TemplateId,
    render,
    request_for,
    validate_payload,
)
from kbforge.gateway.gateway import BatchState
from kbforge.gateway.providers import TRANSPORT_ERROR_MARKER
from kbforge.gateway.templates import get_template, payload_is_empty, schema_registered
from kbforge.gateway.worlds import WorldBuilder, triples_payload
from kbforge.model import ParseStatus


# -- templates and rendering ---------------------------------------------------


def test_every_template_renders_with_its_placeholders():
    samples = {
        TemplateId.ELICIT: {"subject": "Vannevar Bush"},
        TemplateId.NER: {"phrases": "MIT\n1945"},
        TemplateId.TAXO_SEED: {},
        TemplateId.TAXO_SCORE: {"class_name": "Person"},
        TemplateId.TAXO_SUPERCLASS: {"branches": "Agent, Place", "class_name": "City"},
        TemplateId.TAXO_UPDATE: {"taxonomy": "{}", "class_name": "City"},
        TemplateId.ENTAIL_ENTITY: {"label": "MIT", "snippets": "1. MIT: a university"},
        TemplateId.ENTAIL_TRIPLE: {
            "claim": "MIT locatedIn Cambridge",
            "snippets": "1. MIT: in Cambridge",
        },
    }
    for template_id, variables in samples.items():
        system, user = render(template_id, variables)
        assert system.strip()
        for value in variables.values():
            assert value in user


def test_render_missing_placeholder_raises():
    with pytest.raises(TemplateError, match="missing variables"):
        render(TemplateId.ELICIT, {})


def test_render_substitutes_subject():
    _, user = render(TemplateId.ELICIT, {"subject": "Ada Lovelace"})
    assert user == "Subject: Ada Lovelace"


def test_prompt_request_fills_schema_from_template():
    req = request_for("r1", TemplateId.ELICIT, subject="X")
    assert req.schema_id == "triples.v1"
    assert request_for("r2", TemplateId.NER, phrases="a").schema_id == "ner.v1"


def test_prompt_request_rejects_unknown_template():
    with pytest.raises(TemplateError):
        PromptRequest(request_id="r1", template_id="not-a-template")


def test_get_template_exposes_system_text():
    tpl = get_template(TemplateId.ELICIT)
    assert "triples" in tpl.system.lower()


# -- schema validation ---------------------------------------------------------


def test_triples_schema_accepts_well_formed_payload():
    payload = triples_payload("A", [("knows", "B")])
    assert validate_payload("triples.v1", payload)


@pytest.mark.parametrize(
    "payload",
    [
        {"triples": [{"subject": "A", "predicate": "p"}]},  # missing object
        {"triples": [{"subject": "A", "predicate": "p", "object": "B", "extra": 1}]},
        {"triples": "not a list"},
        {"facts": []},
        [],
        "text",
    ],
)
def test_triples_schema_rejects_malformed(payload):
    assert not validate_payload("triples.v1", payload)


def test_ner_schema_round_trip():
    good = {"verdicts": [{"phrase": "MIT", "is_named_entity": True}]}
    assert validate_payload("ner.v1", good)
    assert not validate_payload("ner.v1", {"verdicts": [{"phrase": "MIT"}]})
    assert not validate_payload(
        "ner.v1", {"verdicts": [{"phrase": "MIT", "is_named_entity": "yes"}]}
    )


def test_taxonomy_schema_is_recursive():
    tree = {"root": {"name": "Thing", "children": [{"name": "Agent", "children": []}]}}
    assert validate_payload("taxonomy.v1", tree)
    assert not validate_payload("taxonomy.v1", {"root": {"name": "Thing"}})
    assert not validate_payload(
        "taxonomy.v1",
        {"root": {"name": "Thing", "children": [{"name": "Agent"}]}},
    )


def test_verdict_schemas_are_closed_enums():
    assert validate_payload("verdict_entity.v1", {"verdict": "plausible"})
    assert not validate_payload("verdict_entity.v1", {"verdict": "entailed"})
    assert validate_payload("verdict_triple.v1", {"verdict": "entailed"})
    assert not validate_payload("verdict_triple.v1", {"verdict": "verifiable"})
    assert validate_payload("score.v1", {"score": 7})
    assert not validate_payload("score.v1", {"score": "7"})
    assert validate_payload("choice.v1", {"choice": "Agent"})


def test_validate_unknown_schema_raises():
    with pytest.raises(TemplateError, match="unknown schema"):
        validate_payload("nope.v9", {})
    assert not schema_registered("nope.v9")


def test_payload_is_empty_rules():
    assert payload_is_empty("triples.v1", None)
    assert payload_is_empty("triples.v1", {"triples": []})
    assert not payload_is_empty("triples.v1", triples_payload("A", [("p", "B")]))
    assert not payload_is_empty("score.v1", {"score": 1})


# -- single completions and the parse ladder -----------------------------------


def _gateway_for(world: ScriptedWorld, **overrides) -> LlmGateway:
    return scripted_gateway(world, **overrides)


def test_complete_structured_ok():
    world = WorldBuilder().elicit("A", [("knows", "B")]).build()
    with _gateway_for(world) as gw:
        resp = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert resp.ok
    assert resp.parse_status is ParseStatus.OK
    assert resp.payload == triples_payload("A", [("knows", "B")])
    assert resp.model_id == "scripted-mock"
    assert resp.tokens_in > 0 and resp.tokens_out > 0


def test_unscripted_subject_is_empty_not_error():
    world = WorldBuilder().build()
    with _gateway_for(world) as gw:
        resp = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert resp.parse_status is ParseStatus.EMPTY
    assert resp.payload is None


def test_empty_triple_list_is_empty_status():
    world = WorldBuilder().elicit_empty("A").build()
    with _gateway_for(world) as gw:
        resp = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert resp.parse_status is ParseStatus.EMPTY
    assert resp.payload == {"triples": []}


def test_schema_violation_is_parse_failed():
    world = WorldBuilder().elicit_malformed("A").build()
    with _gateway_for(world) as gw:
        resp = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert resp.parse_status is ParseStatus.PARSE_FAILED
    assert resp.payload is None


class _TextOnlyProvider:
    """Provider that answers with raw text, exercising the JSON-decode rung."""

    def __init__(self, text: str) -> None:
        self.text = text

    def generate(self, request, system, user):
        return ProviderReply(text=self.text, tokens_in=3, tokens_out=5, model_id="text-model")


def test_text_reply_is_decoded_then_validated():
    payload = triples_payload("A", [("p", "B")])
    gw = LlmGateway(_TextOnlyProvider(json.dumps(payload)), GatewayConfig(retry_base_delay=0.0))
    with gw:
        resp = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert resp.ok and resp.payload == payload


def test_undecodable_text_is_parse_failed():
    gw = LlmGateway(_TextOnlyProvider("triples: B, C"), GatewayConfig(retry_base_delay=0.0))
    with gw:
        resp = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert resp.parse_status is ParseStatus.PARSE_FAILED


def test_unregistered_schema_raises_provider_error():
    world = WorldBuilder().build()
    with _gateway_for(world) as gw:
        req = request_for("e1", TemplateId.ELICIT, subject="A")
        req.schema_id = "bogus.v1"
        with pytest.raises(ProviderError, match="not registered"):
            gw.complete_structured(req)


# -- retries -------------------------------------------------------------------


def test_transport_error_retried_to_success():
    world = WorldBuilder().elicit_flaky("A", [("p", "B")]).build()
    provider = RecordingProvider(MockProvider(world))
    with LlmGateway(provider, GatewayConfig(retry_base_delay=0.0)) as gw:
        resp = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert resp.ok
    assert len(provider.seen) == 2  # one fault, one success


def test_transport_errors_exhaust_to_provider_error():
    world = ScriptedWorld()
    world.add(
        {
            "template": "elicit",
            "key": "A",
            "sequence": [TRANSPORT_ERROR_MARKER] * 5,
        }
    )
    provider = RecordingProvider(MockProvider(world))
    with LlmGateway(provider, GatewayConfig(retry_attempts=3, retry_base_delay=0.0)) as gw:
        with pytest.raises(ProviderError, match="after 3 attempts"):
            gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert len(provider.seen) == 3


def test_provider_error_is_not_retried():
    class _Failing:
        calls = 0

        def generate(self, request, system, user):
            self.calls += 1
            raise ProviderError("400 bad request")

    provider = _Failing()
    with LlmGateway(provider, GatewayConfig(retry_base_delay=0.0)) as gw:
        with pytest.raises(ProviderError):
            gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
    assert provider.calls == 1


# -- budget --------------------------------------------------------------------


def test_budget_blocks_only_after_strictly_exceeded():
    # Cap 0 with a positive price: the first send goes through (0 > 0 is
    # false), the second is refused before reaching the provider.
    world = WorldBuilder().elicit("A", [("p", "B")]).elicit("B", [("p", "C")]).build()
    provider = RecordingProvider(MockProvider(world))
    cfg = GatewayConfig(price_per_input_token=1, budget_cap=0, retry_base_delay=0.0)
    with LlmGateway(provider, cfg) as gw:
        first = gw.complete_structured(request_for("e1", TemplateId.ELICIT, subject="A"))
        assert first.ok
        with pytest.raises(BudgetExceededError):
            gw.complete_structured(request_for("e2", TemplateId.ELICIT, subject="B"))
    assert len(provider.seen) == 1


def test_zero_priced_usage_never_exceeds():
    world = WorldBuilder().elicit("A", [("p", "B")]).build()
    with _gateway_for(world, budget_cap=0) as gw:
        for i in range(5):
            req = request_for(f"e{i}", TemplateId.ELICIT, subject="A")
            assert gw.complete_structured(req).ok
        assert gw.ledger.monetary_cost == Decimal("0")


def test_gateway_charge_validates_and_reports():
    world = WorldBuilder().build()
    with _gateway_for(world, price_per_input_token="0.5", budget_cap="1") as gw:
        assert gw.charge(2, 0) is False  # exactly at cap
        assert gw.charge(1, 0) is True
        with pytest.raises(ValueError):
            gw.charge(-1, 0)


def test_float_prices_charge_as_decimal_literals():
    ledger = CostLedger(price_per_input_token=0.1, price_per_output_token=0.2)
    cost = ledger.charge(1, 1)
    assert cost == Decimal("0.3")
    assert ledger.monetary_cost == Decimal("0.3")


def test_ledger_counts_prompts_separately_from_charges():
    ledger = CostLedger(price_per_input_token=1)
    ledger.charge(10, 0)
    assert ledger.prompt_count == 0
    ledger.count_prompt()
    ledger.count_prompt(3)
    assert ledger.prompt_count == 4
    snap = ledger.snapshot().as_dict()
    assert snap == {
        "prompt_count": 4,
        "tokens_in": 10,
        "tokens_out": 0,
        "monetary_cost": "10",
        "budget_cap": None,
    }


@given(
    charges=st.lists(
        st.tuples(st.integers(0, 10_000), st.integers(0, 10_000)), max_size=50
    ),
    price_in=st.decimals(min_value=0, max_value=10, places=6, allow_nan=False),
    price_out=st.decimals(min_value=0, max_value=10, places=6, allow_nan=False),
)
def test_ledger_totals_are_exact_sums(charges, price_in, price_out):
    ledger = CostLedger(price_per_input_token=price_in, price_per_output_token=price_out)
    expected = Decimal("0")
    for tin, tout in charges:
        expected += ledger.charge(tin, tout)
    assert ledger.monetary_cost == expected
    assert ledger.tokens_in == sum(t for t, _ in charges)
    assert ledger.tokens_out == sum(t for _, t in charges)


# -- batches -------------------------------------------------------------------


def _elicit_reqs(subjects: list[str]) -> list[PromptRequest]:
    return [
        request_for(f"e{i}", TemplateId.ELICIT, subject=s) for i, s in enumerate(subjects)
    ]


def test_batch_results_preserve_submission_order():
    world = WorldBuilder()
    for name in "ABCD":
        world.elicit(name, [("p", name.lower())])
    with _gateway_for(world.build()) as gw:
        handle = gw.submit_batch(_elicit_reqs(list("DBCA")))
        status = gw.wait_batch(handle)
    assert status.status is BatchState.COMPLETE
    assert [r.request_id for r in status.results] == ["e0", "e1", "e2", "e3"]
    assert [r.payload["triples"][0]["subject"] for r in status.results] == list("DBCA")


def test_batch_rejections():
    world = WorldBuilder().elicit("A", [("p", "B")]).build()
    with _gateway_for(world, batch_size_limit=2) as gw:
        with pytest.raises(BatchSizeError, match="empty"):
            gw.submit_batch([])
        with pytest.raises(BatchSizeError, match="exceeds limit"):
            gw.submit_batch(_elicit_reqs(["A", "A", "A"]))
        dup = [
            request_for("same", TemplateId.ELICIT, subject="A"),
            request_for("same", TemplateId.ELICIT, subject="A"),
        ]
        with pytest.raises(BatchSizeError, match="duplicate"):
            gw.submit_batch(dup)
        bad = request_for("e9", TemplateId.ELICIT, subject="A")
        bad.schema_id = "bogus.v1"
        with pytest.raises(ProviderError):
            gw.submit_batch([bad])


def test_poll_unknown_handle():
    world = WorldBuilder().build()
    with _gateway_for(world) as gw:
        from kbforge.gateway import BatchHandle

        with pytest.raises(UnknownHandleError):
            gw.poll_batch(BatchHandle("b9999"))


def test_mid_batch_provider_failure_report():
    world = WorldBuilder().elicit("A", [("p", "B")]).build()
    world.add(
        {"template": "elicit", "key": "B", "sequence": [TRANSPORT_ERROR_MARKER] * 5}
    )
    world.add({"template": "elicit", "key": "C", "payload": triples_payload("C", [("p", "D")])})
    with _gateway_for(world, retry_attempts=2) as gw:
        handle = gw.submit_batch(_elicit_reqs(["A", "B", "C"]))
        status = gw.wait_batch(handle)
    assert status.status is BatchState.FAILED
    assert status.results is None
    report = status.error_report
    assert report["kind"] == "provider"
    assert report["completed"] == ["e0"]
    assert report["unprocessed"] == ["e1", "e2"]
    assert [r.request_id for r in report["completed_responses"]] == ["e0"]
    assert "transport failed" in report["reason"]


def test_mid_batch_budget_failure_report():
    world = WorldBuilder().elicit("A", [("p", "B")]).elicit("B", [("p", "C")]).build()
    cfg = dict(price_per_input_token=1, budget_cap=0)
    with _gateway_for(world, **cfg) as gw:
        handle = gw.submit_batch(_elicit_reqs(["A", "B"]))
        status = gw.wait_batch(handle)
    assert status.status is BatchState.FAILED
    report = status.error_report
    assert report["kind"] == "budget"
    assert report["completed"] == ["e0"]
    assert report["unprocessed"] == ["e1"]


def test_terminal_batch_state_is_stable():
    world = WorldBuilder().elicit("A", [("p", "B")]).build()
    with _gateway_for(world) as gw:
        handle = gw.submit_batch(_elicit_reqs(["A"]))
        first = gw.wait_batch(handle)
        second = gw.poll_batch(handle)
    assert first.status is BatchState.COMPLETE
    assert second.status is BatchState.COMPLETE
    assert [r.request_id for r in second.results] == ["e0"]


def test_batch_status_results_hidden_until_complete():
    # a FAILED batch exposes partial work only through the error report
    world = ScriptedWorld()
    world.add({"template": "elicit", "key": "A", "sequence": [TRANSPORT_ERROR_MARKER] * 9})
    with _gateway_for(world, retry_attempts=2) as gw:
        status = gw.wait_batch(gw.submit_batch(_elicit_reqs(["A"])))
    assert status.status is BatchState.FAILED
    assert status.results is None
    assert isinstance(status, BatchStatus)
