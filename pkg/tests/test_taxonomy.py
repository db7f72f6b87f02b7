"""Taxonomy: tree parsing, generality scoring, guided recursive insertion."""

from __future__ import annotations

import json

import pytest

from conftest import scripted_gateway
from kbforge.consolidate import (
    TaxonomyNode,
    build_taxonomy,
    insert_class_recursive,
    score_generality,
    taxonomy_from_payload,
    taxonomy_to_json,
)
from kbforge.gateway import LlmGateway, GatewayConfig, MockProvider, RecordingProvider
from kbforge.gateway.worlds import WorldBuilder, node


def _tree(*children: TaxonomyNode) -> TaxonomyNode:
    return TaxonomyNode("Thing", list(children))


# -- node helpers ---------------------------------------------------------------


def test_node_traversal_and_lookup():
    tree = _tree(
        TaxonomyNode("Agent", [TaxonomyNode("Person")]),
        TaxonomyNode("Place"),
    )
    assert tree.names() == {"Thing", "Agent", "Person", "Place"}
    assert tree.find("Person").class_name == "Person"
    assert tree.find("Robot") is None
    assert tree.edges() == [
        ("Agent", "Thing"),
        ("Place", "Thing"),
        ("Person", "Agent"),
    ]
    assert tree.is_well_formed()


def test_duplicate_names_are_not_well_formed():
    tree = _tree(TaxonomyNode("Agent"), TaxonomyNode("Agent"))
    assert not tree.is_well_formed()


def test_payload_parsing_round_trip():
    tree = _tree(TaxonomyNode("Agent", [TaxonomyNode("Person", generality_score=4)]))
    parsed = taxonomy_from_payload({"root": json.loads(taxonomy_to_json(tree))})
    assert parsed.as_dict() == tree.as_dict()
    assert parsed.find("Person").generality_score == 4


@pytest.mark.parametrize(
    "payload",
    [
        None,
        "tree",
        {},
        {"root": None},
        {"root": {"children": []}},  # nameless
        {"root": {"name": "  ", "children": []}},
        {"root": {"name": "Thing", "children": "Agent"}},
        {"root": {"name": "Thing", "children": [{"name": "A"}, {"name": "A"}]}},
    ],
)
def test_unusable_payloads_parse_to_none(payload):
    assert taxonomy_from_payload(payload) is None


def test_parser_tolerates_missing_children_key():
    parsed = taxonomy_from_payload({"root": {"name": "Thing"}})
    assert parsed is not None and parsed.children == []


# -- generality scoring ----------------------------------------------------------


def test_score_passes_through_valid_answer():
    gw = scripted_gateway(WorldBuilder().score("Person", 3).build())
    with gw:
        assert score_generality("Person", gw) == 3


def test_score_retries_once_then_accepts():
    world = WorldBuilder().build()
    world.add({"template": "taxo_score", "key": "Person", "sequence": [{"score": 0}, {"score": 4}]})
    gw = scripted_gateway(world)
    with gw:
        assert score_generality("Person", gw) == 4


def test_score_defaults_to_ten_when_unusable():
    world = WorldBuilder().score("A", 11).score("B", "seven").build()
    gw = scripted_gateway(world)
    with gw:
        assert score_generality("A", gw) == 10
        assert score_generality("B", gw) == 10
        assert score_generality("Unscripted", gw) == 10


def test_score_rejects_blank_class():
    gw = scripted_gateway(WorldBuilder().build())
    with gw:
        with pytest.raises(ValueError):
            score_generality("  ", gw)


# -- recursive insertion -----------------------------------------------------------


def _gateway(world):
    provider = RecordingProvider(MockProvider(world))
    return LlmGateway(provider, GatewayConfig(retry_base_delay=0.0)), provider


def test_insert_walks_branches_then_updates_leaf():
    world = (
        WorldBuilder()
        .superclass("Person", "Thing", "Agent")
        .update("Person", "Agent", node("Agent", node("Person")))
        .build()
    )
    tree = _tree(TaxonomyNode("Agent"), TaxonomyNode("Place"))
    gw, provider = _gateway(world)
    with gw:
        insert_class_recursive(tree, "Person", gw, score=3)
    assert [c.class_name for c in tree.find("Agent").children] == ["Person"]
    assert tree.find("Person").generality_score == 3
    templates = [r.template_id.value for r in provider.seen]
    assert templates == ["taxo_superclass", "taxo_update"]


def test_insert_null_choice_updates_current_node():
    world = (
        WorldBuilder()
        .superclass("Robot", "Thing", "NULL")
        .update("Robot", "Thing", node("Thing", node("Agent"), node("Robot")))
        .build()
    )
    tree = _tree(TaxonomyNode("Agent"))
    gw, _ = _gateway(world)
    with gw:
        insert_class_recursive(tree, "Robot", gw)
    assert {c.class_name for c in tree.children} == {"Agent", "Robot"}


def test_insert_choice_must_name_a_real_branch():
    world = (
        WorldBuilder()
        .superclass("Robot", "Thing", "Vehicle")  # not a child of Thing
        .update("Robot", "Thing", node("Thing", node("Agent"), node("Robot")))
        .build()
    )
    tree = _tree(TaxonomyNode("Agent"))
    gw, _ = _gateway(world)
    with gw:
        insert_class_recursive(tree, "Robot", gw)
    assert tree.find("Robot") is not None
    assert tree.find("Robot") in tree.children


def test_valid_update_transplants_and_carries_scores():
    existing = TaxonomyNode("Agent", [TaxonomyNode("Person", generality_score=4)])
    tree = _tree(existing)
    world = (
        WorldBuilder()
        .superclass("Engineer", "Thing", "Agent")
        .superclass("Engineer", "Agent", "Person")
        .update("Engineer", "Person", node("Person", node("Engineer")))
        .build()
    )
    gw, _ = _gateway(world)
    with gw:
        insert_class_recursive(tree, "Engineer", gw, score=7)
    person = tree.find("Person")
    assert person.generality_score == 4  # untouched by the transplant
    assert [c.class_name for c in person.children] == ["Engineer"]
    assert tree.find("Engineer").generality_score == 7


@pytest.mark.parametrize(
    "bad_update",
    [
        node("RenamedAgent", node("Person"), node("Engineer")),  # root renamed
        node("Agent", node("Engineer")),  # drops the existing Person
        node("Agent", node("Person"), node("Engineer"), node("Place")),  # collides outside
        node("Agent", node("Person")),  # forgot the class being inserted
    ],
)
def test_invalid_updates_fall_back_to_direct_child(bad_update):
    tree = _tree(
        TaxonomyNode("Agent", [TaxonomyNode("Person")]),
        TaxonomyNode("Place"),
    )
    world = (
        WorldBuilder()
        .superclass("Engineer", "Thing", "Agent")
        .superclass("Engineer", "Agent", "NULL")
        .update("Engineer", "Agent", bad_update)
        .build()
    )
    gw, provider = _gateway(world)
    with gw:
        insert_class_recursive(tree, "Engineer", gw, score=6)
    agent = tree.find("Agent")
    assert [c.class_name for c in agent.children] == ["Person", "Engineer"]
    assert tree.find("Engineer").generality_score == 6
    # the invalid answer was retried before giving up
    updates = [r for r in provider.seen if r.template_id.value == "taxo_update"]
    assert len(updates) == 2


def test_update_retry_accepts_second_answer():
    tree = _tree(TaxonomyNode("Agent"))
    world = WorldBuilder().superclass("Robot", "Thing", "NULL").build()
    world.add(
        {
            "template": "taxo_update",
            "key": "Robot@Thing",
            "sequence": [
                {"root": node("Wrong", node("Robot"))},
                {"root": node("Thing", node("Agent"), node("Robot"))},
            ],
        }
    )
    gw, _ = _gateway(world)
    with gw:
        insert_class_recursive(tree, "Robot", gw)
    assert {c.class_name for c in tree.children} == {"Agent", "Robot"}


def test_unanswered_update_falls_back_quietly():
    tree = _tree()
    gw, provider = _gateway(WorldBuilder().build())  # nothing scripted at all
    with gw:
        insert_class_recursive(tree, "Robot", gw)
    assert [c.class_name for c in tree.children] == ["Robot"]
    assert len(provider.seen) == 2  # two unanswered update attempts


# -- full build --------------------------------------------------------------------


def test_build_seeds_then_inserts_ascending_score_then_name():
    world = (
        WorldBuilder()
        .seed_taxonomy(node("Thing"))
        .update("C", "Thing", node("Thing", node("C")))
        .update("A", "Thing", node("Thing", node("C"), node("A")))
        .update("B", "Thing", node("Thing", node("C"), node("A"), node("B")))
        .build()
    )
    gw, _ = _gateway(world)
    with gw:
        root = build_taxonomy({"B": 5, "A": 5, "C": 2}, gw)
    # each scripted update only validates if insertions arrived as C, A, B
    assert [c.class_name for c in root.children] == ["C", "A", "B"]
    assert root.find("C").generality_score == 2
    assert root.find("A").generality_score == 5


def test_build_skips_classes_already_seeded():
    world = WorldBuilder().seed_taxonomy(node("Thing", node("Agent"))).build()
    gw, provider = _gateway(world)
    with gw:
        root = build_taxonomy({"Agent": 1}, gw)
    assert [c.class_name for c in root.children] == ["Agent"]
    assert [r for r in provider.seen if r.template_id.value != "taxo_seed"] == []


def test_build_falls_back_to_default_root_without_seed():
    gw, provider = _gateway(WorldBuilder().build())
    with gw:
        root = build_taxonomy({}, gw)
    assert root.class_name == "Thing"
    assert root.children == []
    seeds = [r for r in provider.seen if r.template_id.value == "taxo_seed"]
    assert len(seeds) == 2  # unusable seed answer is retried once
