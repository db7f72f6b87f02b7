"""Crawler behaviour: screening, NER, layer order, checkpointing, resume."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kbforge.crawler import Crawler, CrawlConfig, normalize_label, screens_as_literal
from kbforge.crawler.checkpoint import load_checkpoint
from kbforge.crawler.ner import NerClassifier
from kbforge.errors import CheckpointError, LabelError
from kbforge.gateway import (
    GatewayConfig,
    LlmGateway,
    MockProvider,
    RecordingProvider,
)
from kbforge.gateway.providers import TRANSPORT_ERROR_MARKER
from kbforge.gateway.worlds import WorldBuilder, trace_world, triples_payload
from kbforge.kbstore import KnowledgeBase
from kbforge.model import ObjectKind, SubjectStatus


def _gateway(world, **overrides):
    provider = RecordingProvider(MockProvider(world))
    kwargs = dict(retry_base_delay=0.0)
    kwargs.update(overrides)
    return LlmGateway(provider, GatewayConfig(**kwargs)), provider


# -- label screening -----------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    [
        "42",
        "-17",
        "+3.14",
        "1,000,000",
        "85%",
        "2024-01-15",
        "1917/05/29",
        "29/05/1917",
        "29 May 1917",
        "May 29, 1917",
        "https://example.org/page",
        "www.example.org",
        "x" * 101,
    ],
)
def test_screens_as_literal(text):
    assert screens_as_literal(text)


@pytest.mark.parametrize(
    "text",
    ["MIT", "Vannevar Bush", "Route 66", "1984 (novel)", "C3PO", "x" * 100],
)
def test_does_not_screen_entity_like_labels(text):
    assert not screens_as_literal(text)


def test_normalize_label_collapses_whitespace():
    assert normalize_label("  As We  May\tThink ") == "As We May Think"


@pytest.mark.parametrize("bad", ["", "   ", "\t\n"])
def test_normalize_label_rejects_blank(bad):
    with pytest.raises(LabelError):
        normalize_label(bad)


@given(st.text(min_size=1).filter(lambda s: s.strip()))
def test_normalize_label_is_idempotent(text):
    once = normalize_label(text)
    assert normalize_label(once) == once
    assert "  " not in once


# -- NER classification --------------------------------------------------------


def test_ner_chunks_and_defaults():
    world = WorldBuilder().mark_entities(["P1", "P3"]).build()
    gw, provider = _gateway(world)
    with gw:
        ner = NerClassifier(gw, batch_size=2)
        out = ner.classify(["P1", "P2", "P3", "2024-01-15", "P4", "P5"])
    assert out == {
        "P1": True,
        "P2": False,
        "P3": True,
        "2024-01-15": False,  # screened, never sent to the model
        "P4": False,
        "P5": False,
    }
    # five unscreened phrases over chunks of two
    assert sorted({r.request_id for r in provider.seen}) == ["ner-1", "ner-2", "ner-3"]


def test_ner_cache_avoids_reprompting():
    world = WorldBuilder().mark_entities(["P1"]).build()
    gw, provider = _gateway(world)
    with gw:
        ner = NerClassifier(gw, batch_size=10)
        ner.classify(["P1", "P2"])
        first = len(provider.seen)
        out = ner.classify(["P1", "P2", "P9"])
    assert out == {"P1": True, "P2": False, "P9": False}
    assert len(provider.seen) == first + 1  # only the chunk for P9


def test_ner_seed_cache_keeps_existing_entries():
    world = WorldBuilder().build()
    gw, provider = _gateway(world)
    with gw:
        ner = NerClassifier(gw)
        ner.seed_cache("P1", True)
        ner.seed_cache("P1", False)  # must not clobber the first verdict
        ner.seed_cache("P2", True)
        out = ner.classify(["P1", "P2"])
    assert out == {"P1": True, "P2": True}
    assert provider.seen == []


def test_ner_parse_failure_marks_chunk_false():
    world = WorldBuilder().mark_entities(["P1", "P2"]).build()
    world_obj = world
    world_obj.add({"template": "ner", "key": "P1\nP2", "payload": {"bogus": 1}})
    gw, _ = _gateway(world_obj)
    with gw:
        out = NerClassifier(gw, batch_size=2).classify(["P1", "P2"])
    assert out == {"P1": False, "P2": False}


def test_ner_partial_verdicts_default_false():
    world = WorldBuilder().build()
    world.add(
        {
            "template": "ner",
            "key": "P1\nP2",
            "payload": {"verdicts": [{"phrase": "P1", "is_named_entity": True}]},
        }
    )
    gw, _ = _gateway(world)
    with gw:
        out = NerClassifier(gw, batch_size=2).classify(["P1", "P2"])
    assert out == {"P1": True, "P2": False}


# -- BFS crawl over a tiny traceable world --------------------------------------


@pytest.fixture
def trace_run():
    gw, provider = _gateway(trace_world())
    kb = KnowledgeBase()
    crawler = Crawler(gw, kb, CrawlConfig(seed="A", max_depth=5))
    report = crawler.run()
    gw.close()
    return report, crawler, kb, provider


def test_trace_layer_statistics(trace_run):
    report, _, _, _ = trace_run
    stats = {
        depth: (s.prompted, s.nonempty, s.empty, s.parse_failed, s.new_entities)
        for depth, s in report.layers.items()
    }
    assert stats == {
        1: (1, 1, 0, 0, 2),
        2: (2, 1, 1, 0, 1),
        3: (1, 0, 1, 0, 0),
    }
    for s in report.layers.values():
        assert s.prompted == s.nonempty + s.empty + s.parse_failed
    assert report.total_triples == 5
    assert report.halted is None and report.resumed is False
    assert report.cost.prompt_count == 6  # four elicitations, two NER chunks


def test_trace_layer_order_and_ids(trace_run):
    _, crawler, _, provider = trace_run
    assert crawler.layer_order == {1: ["A"], 2: ["B", "C"], 3: ["D"]}
    assert set(crawler.visited) == {"A", "B", "C", "D"}
    assert all(e.status is not SubjectStatus.QUEUED for e in crawler.visited.values())
    elicit_ids = sorted(
        r.request_id for r in provider.seen if r.request_id.startswith("e")
    )
    assert elicit_ids == ["e1-000000", "e2-000000", "e2-000001", "e3-000000"]


def test_trace_store_contents(trace_run):
    _, _, kb, _ = trace_run
    assert {rec.label: rec.depth for rec in kb.records()} == {
        "A": 1,
        "B": 2,
        "C": 2,
        "D": 3,
    }
    a = kb.query_subject("A")
    assert a.has_instance_of
    assert [(t.predicate_raw, t.object_value, t.object_kind) for t in a.triples] == [
        ("relatedTo", "B", ObjectKind.NAMED_ENTITY),
        ("relatedTo", "C", ObjectKind.NAMED_ENTITY),
        ("instanceOf", "Letter", ObjectKind.LITERAL),
    ]
    assert all(t.provenance.batch_id == "L1.0" for t in a.triples)
    assert kb.query_subject("C").status is SubjectStatus.DONE_EMPTY


def test_each_subject_prompted_exactly_once(trace_run):
    _, _, _, provider = trace_run
    elicited = [r.variables["subject"] for r in provider.seen if r.request_id.startswith("e")]
    assert sorted(elicited) == sorted(set(elicited))


def test_max_depth_stops_expansion():
    gw, _ = _gateway(trace_world())
    kb = KnowledgeBase()
    crawler = Crawler(gw, kb, CrawlConfig(seed="A", max_depth=2))
    report = crawler.run()
    gw.close()
    assert set(report.layers) == {1, 2}
    assert set(crawler.visited) == {"A", "B", "C"}
    assert kb.query_subject("D") is None


# -- parse behaviour -----------------------------------------------------------


def test_parse_normalizes_dedupes_and_flags_instance_of():
    world = (
        WorldBuilder()
        .elicit(
            "S",
            [
                ("p", "X"),
                ("p", "X"),  # exact duplicate within one reply
                (" p ", " X   Y "),
                ("", "Z"),  # blank predicate dropped
                ("q", ""),  # blank object dropped
                ("isA", "Thing"),
            ],
        )
        .build()
    )
    gw, _ = _gateway(world)
    kb = KnowledgeBase()
    Crawler(gw, kb, CrawlConfig(seed="S", max_depth=1)).run()
    gw.close()
    rec = kb.query_subject("S")
    assert [(t.predicate_raw, t.object_value) for t in rec.triples] == [
        ("p", "X"),
        ("p", "X Y"),
        ("isA", "Thing"),
    ]
    assert rec.has_instance_of


def test_parse_cap_truncates_reply_rows():
    world = WorldBuilder().elicit("T", [("a", "1"), ("b", "2"), ("c", "3")]).build()
    gw, _ = _gateway(world)
    kb = KnowledgeBase()
    Crawler(gw, kb, CrawlConfig(seed="T", max_depth=1, parse_cap=2)).run()
    gw.close()
    assert [(t.predicate_raw, t.object_value) for t in kb.query_subject("T").triples] == [
        ("a", "1"),
        ("b", "2"),
    ]


def test_all_blank_reply_counts_as_empty():
    world = WorldBuilder().elicit("S", [("", "Z"), ("q", " ")]).build()
    gw, _ = _gateway(world)
    kb = KnowledgeBase()
    report = Crawler(gw, kb, CrawlConfig(seed="S", max_depth=1)).run()
    gw.close()
    assert report.layers[1].empty == 1
    assert kb.query_subject("S").status is SubjectStatus.DONE_EMPTY


def test_malformed_reply_counts_as_parse_failed():
    world = WorldBuilder().elicit_malformed("S").build()
    gw, _ = _gateway(world)
    kb = KnowledgeBase()
    report = Crawler(gw, kb, CrawlConfig(seed="S", max_depth=1)).run()
    gw.close()
    assert report.layers[1].parse_failed == 1
    assert kb.query_subject("S").status is SubjectStatus.PARSE_FAILED


# -- checkpointing and resume ---------------------------------------------------


def _halting_world():
    """S fans out to B1/B2 at depth 2; B2 fails transport three times."""
    builder = (
        WorldBuilder()
        .elicit("S", [("knows", "B1"), ("knows", "B2")])
        .elicit("B1", [("knows", "C1")])
        .elicit("C1", [])
        .mark_entities(["B1", "B2", "C1"])
    )
    builder.add(
        "elicit",
        "B2",
        sequence=[TRANSPORT_ERROR_MARKER] * 3 + [triples_payload("B2", [("knows", "C1")])],
    )
    return builder.build()


def _healthy_world():
    return (
        WorldBuilder()
        .elicit("S", [("knows", "B1"), ("knows", "B2")])
        .elicit("B1", [("knows", "C1")])
        .elicit("B2", [("knows", "C1")])
        .elicit("C1", [])
        .mark_entities(["B1", "B2", "C1"])
        .build()
    )


def test_provider_halt_checkpoints_without_partial_insert(tmp_path):
    world = _halting_world()
    ckpt = tmp_path / "ckpt.jsonl"
    gw, _ = _gateway(world)
    kb = KnowledgeBase()
    report = Crawler(gw, kb, CrawlConfig(seed="S", max_depth=3, checkpoint_path=ckpt)).run()
    gw.close()
    assert report.halted.startswith("provider:")
    # layer 1 landed in the store; the interrupted layer 2 did not
    assert kb.labels() == ["S"]
    assert kb.triple_count() == 2
    # but B1's finished reply is preserved in the checkpoint for resume
    records = load_checkpoint(ckpt)
    assert [r.subject for r in records] == ["S", "B1"]
    assert records[1].batch_id == "L2.0"


def test_resume_completes_and_matches_uninterrupted_run(tmp_path):
    world = _halting_world()
    ckpt = tmp_path / "ckpt.jsonl"
    gw1, _ = _gateway(world)
    kb1 = KnowledgeBase()
    Crawler(gw1, kb1, CrawlConfig(seed="S", max_depth=3, checkpoint_path=ckpt)).run()
    gw1.close()

    # resume against the same world; the scripted fault sequence has moved
    # past its transport errors, standing in for a recovered provider
    gw2, provider2 = _gateway(world)
    kb2 = KnowledgeBase()
    report = Crawler(gw2, kb2, CrawlConfig(seed="S", max_depth=3, checkpoint_path=ckpt)).run()
    gw2.close()
    assert report.resumed is True
    assert report.halted is None
    # only the unanswered subject and the next layer were prompted
    elicit_ids = sorted(
        r.request_id for r in provider2.seen if r.request_id.startswith("e")
    )
    assert elicit_ids == ["e2-000001", "e3-000000"]

    gw3, _ = _gateway(_healthy_world())
    kb3 = KnowledgeBase()
    Crawler(gw3, kb3, CrawlConfig(seed="S", max_depth=3)).run()
    gw3.close()
    assert sorted(t.as_tuple() for t in kb2.all_triples()) == sorted(
        t.as_tuple() for t in kb3.all_triples()
    )
    assert {r.label: r.depth for r in kb2.records()} == {
        r.label: r.depth for r in kb3.records()
    }


def test_resume_after_completion_prompts_nothing(tmp_path):
    ckpt = tmp_path / "ckpt.jsonl"
    gw1, _ = _gateway(trace_world())
    kb1 = KnowledgeBase()
    Crawler(gw1, kb1, CrawlConfig(seed="A", max_depth=5, checkpoint_path=ckpt)).run()
    gw1.close()

    gw2, provider2 = _gateway(trace_world())
    kb2 = KnowledgeBase()
    report = Crawler(gw2, kb2, CrawlConfig(seed="A", max_depth=5, checkpoint_path=ckpt)).run()
    gw2.close()
    assert provider2.seen == []
    assert report.resumed is True
    assert sorted(t.as_tuple() for t in kb2.all_triples()) == sorted(
        t.as_tuple() for t in kb1.all_triples()
    )


def test_budget_halt_then_resume(tmp_path):
    world = _healthy_world()
    ckpt = tmp_path / "ckpt.jsonl"
    # cap 0 with positive prices: first elicitation lands, second is refused
    gw1, _ = _gateway(world, price_per_input_token=1, budget_cap=0)
    kb1 = KnowledgeBase()
    report1 = Crawler(gw1, kb1, CrawlConfig(seed="S", max_depth=3, checkpoint_path=ckpt)).run()
    gw1.close()
    assert report1.halted == "budget"

    gw2, _ = _gateway(world)
    kb2 = KnowledgeBase()
    report2 = Crawler(gw2, kb2, CrawlConfig(seed="S", max_depth=3, checkpoint_path=ckpt)).run()
    gw2.close()
    assert report2.halted is None and report2.resumed is True
    assert kb2.triple_count() == 4


def test_checkpoint_torn_tail_is_tolerated(tmp_path):
    ckpt = tmp_path / "ckpt.jsonl"
    world = WorldBuilder().elicit("S", [("p", "X")]).build()
    gw1, _ = _gateway(world)
    Crawler(gw1, KnowledgeBase(), CrawlConfig(seed="S", max_depth=1, checkpoint_path=ckpt)).run()
    gw1.close()
    ckpt.write_text(ckpt.read_text(encoding="utf-8") + '{"subject": "tr', encoding="utf-8")

    gw2, provider2 = _gateway(world)
    kb2 = KnowledgeBase()
    report = Crawler(gw2, kb2, CrawlConfig(seed="S", max_depth=1, checkpoint_path=ckpt)).run()
    gw2.close()
    assert report.resumed is True
    assert provider2.seen == []
    assert kb2.triple_count() == 1


def test_checkpoint_malformed_record_raises_with_line(tmp_path):
    ckpt = tmp_path / "bad.jsonl"
    ckpt.write_text('{"subject": "S"}\n', encoding="utf-8")
    world = WorldBuilder().build()
    gw, _ = _gateway(world)
    with pytest.raises(CheckpointError, match="line 1: malformed checkpoint record"):
        Crawler(gw, KnowledgeBase(), CrawlConfig(seed="S", max_depth=1, checkpoint_path=ckpt)).run()
    gw.close()


def test_checkpoint_non_json_line_raises(tmp_path):
    ckpt = tmp_path / "corrupt.jsonl"
    ckpt.write_text("not json at all\nmore garbage\n", encoding="utf-8")
    world = WorldBuilder().build()
    gw, _ = _gateway(world)
    with pytest.raises(CheckpointError, match="corrupt checkpoint"):
        Crawler(gw, KnowledgeBase(), CrawlConfig(seed="S", max_depth=1, checkpoint_path=ckpt)).run()
    gw.close()


def test_checkpoint_for_different_seed_is_rejected(tmp_path):
    ckpt = tmp_path / "ckpt.jsonl"
    world = WorldBuilder().elicit("S", [("p", "X")]).build()
    gw, _ = _gateway(world)
    Crawler(gw, KnowledgeBase(), CrawlConfig(seed="S", max_depth=1, checkpoint_path=ckpt)).run()
    with pytest.raises(CheckpointError, match="expected seed"):
        Crawler(gw, KnowledgeBase(), CrawlConfig(seed="Other", max_depth=1, checkpoint_path=ckpt)).run()
    gw.close()
