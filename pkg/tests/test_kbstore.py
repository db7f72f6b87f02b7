"""Knowledge store: inserts, merges, aliases, persistence, statistics."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import kb_with, mk_result, mk_triple
from kbforge.kbstore import KnowledgeBase, compute_stats
from kbforge.model import (
    ElicitationResult,
    ObjectKind,
    ParseStatus,
    SubjectStatus,
)

E = ObjectKind.NAMED_ENTITY
L = ObjectKind.LITERAL


# -- inserts -------------------------------------------------------------------


def test_insert_returns_added_and_is_idempotent():
    kb = KnowledgeBase()
    result = mk_result("A", [("p", "B", E), ("q", "1945", L)])
    assert kb.insert_triples(result, depth=1) == 2
    assert kb.insert_triples(result, depth=1) == 0
    assert kb.triple_count() == 2
    assert kb.entity_count() == 1


def test_insert_extends_existing_record_without_duplicates():
    kb = KnowledgeBase()
    kb.insert_triples(mk_result("A", [("p", "B", E)]), depth=1)
    added = kb.insert_triples(mk_result("A", [("p", "B", E), ("p", "C", E)]), depth=1)
    assert added == 1
    assert kb.query_subject("A").triple_keys() == {("p", "B"), ("p", "C")}


def test_insert_records_status_and_instance_flag():
    kb = KnowledgeBase()
    kb.insert_triples(
        mk_result("A", [("instanceOf", "Person", L)], has_instance_of=True), depth=2
    )
    kb.insert_triples(
        ElicitationResult(subject="B", parse_status=ParseStatus.EMPTY), depth=3
    )
    a, b = kb.query_subject("A"), kb.query_subject("B")
    assert a.depth == 2 and a.has_instance_of
    assert a.status is SubjectStatus.DONE_NONEMPTY
    assert b.status is SubjectStatus.DONE_EMPTY and b.triples == []


def test_query_class_uses_effective_names_in_first_seen_order():
    kb = KnowledgeBase()
    kb.insert_triples(mk_result("A", [("instanceOf", "Human", L)]), depth=1)
    kb.insert_triples(mk_result("B", [("isA", "Person", L)]), depth=1)
    kb.insert_triples(mk_result("C", [("type of", "Person", L)]), depth=1)
    # canonicalizing A's class to Person folds it into the same bucket
    kb.query_subject("A").triples[0].object_canonical = "Person"
    assert kb.query_class("Person") == ["A", "B"]
    assert kb.query_class("Human") == []
    assert kb.query_subject("A").classes == ["Person"]


# -- merges and aliases ----------------------------------------------------------


def _duplicate_pair() -> KnowledgeBase:
    kb = KnowledgeBase()
    kb.insert_triples(
        mk_result("John F. Kennedy", [("birthDate", "1917-05-29", L), ("party", "D", E)]),
        depth=2,
    )
    kb.insert_triples(
        mk_result(
            "John Fitzgerald Kennedy",
            [("birthDate", "1917-05-29", L), ("spouse", "Jacqueline", E)],
        ),
        depth=3,
    )
    return kb


def test_merge_unions_triples_and_counts_carried():
    kb = _duplicate_pair()
    carried = kb.merge_entities("John F. Kennedy", ["John Fitzgerald Kennedy"])
    assert carried == 1  # the shared birthDate row already existed
    winner = kb.query_subject("John F. Kennedy")
    assert winner.triple_keys() == {
        ("birthDate", "1917-05-29"),
        ("party", "D"),
        ("spouse", "Jacqueline"),
    }
    assert all(t.subject == "John F. Kennedy" for t in winner.triples)
    assert kb.entity_count() == 1


def test_merge_resolves_queries_through_alias():
    kb = _duplicate_pair()
    kb.merge_entities("John F. Kennedy", ["John Fitzgerald Kennedy"])
    via_alias = kb.query_subject("John Fitzgerald Kennedy")
    assert via_alias is not None
    assert via_alias.label == "John F. Kennedy"
    assert kb.alias_map() == {"John Fitzgerald Kennedy": "John F. Kennedy"}
    assert "John Fitzgerald Kennedy" in via_alias.aliases


def test_merge_chains_aliases_to_final_winner():
    kb = KnowledgeBase()
    for name in ("A", "B", "C"):
        kb.insert_triples(mk_result(name, [("p", name.lower(), L)]), depth=1)
    kb.merge_entities("B", ["C"])
    kb.merge_entities("A", ["B"])
    assert set(kb.query_subject("A").aliases) == {"B", "C"}
    assert kb.query_subject("C").label == "A"
    assert kb.alias_map() == {"B": "A", "C": "A"}
    assert kb.labels() == ["A"]


def test_merge_unknown_loser_raises():
    kb = _duplicate_pair()
    with pytest.raises(KeyError):
        kb.merge_entities("John F. Kennedy", ["Nobody"])


# -- persistence -----------------------------------------------------------------


def test_save_load_round_trip_preserves_everything(tmp_path):
    kb = KnowledgeBase()
    kb.insert_triples(
        mk_result("A", [("instanceOf", "Person", L), ("knows", "B", E)], has_instance_of=True),
        depth=1,
    )
    kb.insert_triples(mk_result("B", [("born in", "1917", L)]), depth=2)
    kb.query_subject("A").triples[0].predicate_canonical = "instance of"
    kb.query_subject("B").triples[0].object_canonical = "1917-01-01"
    kb.merge_entities("A", ["B"])

    path = tmp_path / "kb.jsonl"
    kb.save(path)
    loaded = KnowledgeBase.load(path)

    assert loaded.labels() == kb.labels()
    assert loaded.alias_map() == kb.alias_map()
    assert sorted(t.as_tuple() for t in loaded.all_triples()) == sorted(
        t.as_tuple() for t in kb.all_triples()
    )
    rec = loaded.query_subject("A")
    assert rec.has_instance_of and rec.depth == 1
    assert rec.triples[0].predicate == "instance of"  # canonical survives
    assert rec.triples[0].predicate_raw == "instanceOf"


_labels = st.text(
    st.characters(codec="utf-8", exclude_categories=("Cs", "Cc")), min_size=1, max_size=30
).filter(lambda s: s.strip() == s and s)


@given(
    rows=st.lists(
        st.tuples(
            _labels,
            _labels,
            _labels,
            st.sampled_from([E, L, ObjectKind.ENTITY_CANDIDATE]),
        ),
        min_size=1,
        max_size=20,
        unique_by=lambda r: (r[0], r[1], r[2]),
    )
)
def test_save_load_round_trip_property(tmp_path_factory, rows):
    kb = KnowledgeBase()
    for subject, pred, obj, kind in rows:
        kb.insert_triples(
            ElicitationResult(
                subject=subject,
                triples=[mk_triple(subject, pred, obj, kind=kind, layer=2)],
            ),
            depth=2,
        )
    path = tmp_path_factory.mktemp("kb") / "kb.jsonl"
    kb.save(path)
    loaded = KnowledgeBase.load(path)
    assert sorted(t.as_tuple() for t in loaded.all_triples()) == sorted(
        t.as_tuple() for t in kb.all_triples()
    )
    assert loaded.labels() == kb.labels()


# -- statistics ------------------------------------------------------------------


def test_stats_averages_are_exact_fractions():
    kb = KnowledgeBase()
    for label, n in (("A", 10), ("B", 10), ("C", 50), ("D", 70)):
        rows = [(f"p{i}", f"o{i}", L) for i in range(n)]
        kb.insert_triples(mk_result(label, rows), depth=1)
    stats = compute_stats(kb)
    assert stats.avg_triples_per_entity == Fraction(140, 4) == Fraction(35)
    assert stats.avg_label_length == Fraction(1)
    assert stats.as_dict()["avg_triples_per_entity_exact"] == "35"


def test_stats_distinguish_raw_and_canonical_names():
    kb = KnowledgeBase()
    kb.insert_triples(mk_result("A", [("isA", "Human", L)]), depth=1)
    kb.insert_triples(mk_result("B", [("instanceOf", "Person", L)]), depth=1)
    for rec in kb.records():
        for t in rec.triples:
            t.predicate_canonical = "instanceOf"
            t.object_canonical = "Person"
    stats = compute_stats(kb)
    assert stats.relation_count_raw == 2
    assert stats.relation_count_canonical == 1
    assert stats.class_count_raw == 2
    assert stats.class_count_canonical == 1


def test_stats_object_kind_counts_and_layers():
    kb = KnowledgeBase()
    kb.insert_triples(
        mk_result("A", [("knows", "B", E), ("born", "1917", L)], layer=1), depth=1
    )
    kb.insert_triples(mk_result("B", [("knows", "C", E)], layer=2, batch="L2.0"), depth=2)
    stats = compute_stats(kb)
    assert stats.entity_object_count == 2
    assert stats.literal_object_count == 1
    slices = {d: (s.entities, s.triples) for d, s in stats.per_layer.items()}
    assert slices == {1: (1, 2), 2: (1, 1)}
    assert stats.as_dict()["per_layer"] == {
        "1": {"entities": 1, "triples": 2},
        "2": {"entities": 1, "triples": 1},
    }


def test_stats_on_empty_store_are_zero():
    stats = compute_stats(KnowledgeBase())
    assert stats.entity_count == 0
    assert stats.avg_triples_per_entity == Fraction(0)
    assert stats.per_layer == {}


def test_stats_count_helper_builders():
    kb = kb_with([mk_result("A", [("p", "B", E)])])
    assert compute_stats(kb).triple_count == 1
