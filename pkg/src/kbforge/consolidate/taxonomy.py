"""LLM-guided taxonomy construction.

The tree starts from an LLM-proposed seed. Classes are inserted one at a
time, most general first; each insertion walks down the tree by asking
the model which branch subsumes the class, then asks it to rewrite the
final subtree with the class included. Model answers are never trusted
blindly: an update that loses existing names, omits the class, renames
the subtree root, or collides with names elsewhere in the tree is
retried once and then overridden by attaching the class directly.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from kbforge.gateway import LlmGateway, PromptRequest, TemplateId

log = logging.getLogger(__name__)

_FALLBACK_ROOT = "Thing"
_NULL_ANSWER = "NULL"
_ids: Iterator[int] = itertools.count()


def _rid(tag: str) -> str:
    return f"tax-{tag}-{next(_ids):05d}"


@dataclass
class TaxonomyNode:
    class_name: str
    children: list["TaxonomyNode"] = field(default_factory=list)
    generality_score: int | None = None

    def iter_nodes(self) -> Iterator["TaxonomyNode"]:
        yield self
        for child in self.children:
            yield from child.iter_nodes()

    def names(self) -> set[str]:
        return {node.class_name for node in self.iter_nodes()}

    def find(self, name: str) -> "TaxonomyNode | None":
        for node in self.iter_nodes():
            if node.class_name == name:
                return node
        return None

    def edges(self) -> list[tuple[str, str]]:
        """(child, parent) pairs over the whole tree."""
        out: list[tuple[str, str]] = []
        for node in self.iter_nodes():
            for child in node.children:
                out.append((child.class_name, node.class_name))
        return out

    def as_dict(self) -> dict:
        d: dict = {"name": self.class_name, "children": [c.as_dict() for c in self.children]}
        if self.generality_score is not None:
            d["generality_score"] = self.generality_score
        return d

    def is_well_formed(self) -> bool:
        names: list[str] = [n.class_name for n in self.iter_nodes()]
        return len(names) == len(set(names))


def taxonomy_from_payload(payload: object) -> TaxonomyNode | None:
    """Parse a {"root": {"name", "children"}} payload; None when unusable."""
    if not isinstance(payload, dict):
        return None
    root = payload.get("root")
    node = _node_from_dict(root)
    if node is None or not node.is_well_formed():
        return None
    return node


def _node_from_dict(raw: object) -> TaxonomyNode | None:
    if not isinstance(raw, dict):
        return None
    name = raw.get("name")
    if not isinstance(name, str) or not name.strip():
        return None
    children_raw = raw.get("children", [])
    if not isinstance(children_raw, list):
        return None
    children = []
    for item in children_raw:
        child = _node_from_dict(item)
        if child is None:
            return None
        children.append(child)
    score = raw.get("generality_score")
    if not isinstance(score, int):
        score = None
    return TaxonomyNode(name.strip(), children, score)


def taxonomy_to_json(node: TaxonomyNode, indent: int = 2) -> str:
    return json.dumps(node.as_dict(), indent=indent, ensure_ascii=False)


def score_generality(class_name: str, gateway: LlmGateway) -> int:
    """Integer generality in [1, 10]; bad answers retry once then default 10."""
    if not class_name.strip():
        raise ValueError("class name must be non-empty")
    for _ in range(2):
        resp = gateway.complete_structured(
            PromptRequest(_rid("score"), TemplateId.TAXO_SCORE, {"class_name": class_name})
        )
        if resp.ok and isinstance(resp.payload, dict):
            score = resp.payload.get("score")
            if isinstance(score, int) and 1 <= score <= 10:
                return score
        log.warning("unusable generality score for %r, retrying", class_name)
    return 10


def _ask_seed(gateway: LlmGateway) -> TaxonomyNode:
    for _ in range(2):
        resp = gateway.complete_structured(PromptRequest(_rid("seed"), TemplateId.TAXO_SEED, {}))
        if resp.ok:
            node = taxonomy_from_payload(resp.payload)
            if node is not None:
                return node
        log.warning("seed taxonomy unusable, retrying")
    log.warning("falling back to single-root taxonomy %r", _FALLBACK_ROOT)
    return TaxonomyNode(_FALLBACK_ROOT)


def _ask_superclass(gateway: LlmGateway, node: TaxonomyNode, class_name: str) -> str | None:
    """Pick one of node's children as the superclass, or None for NULL."""
    branches = [child.class_name for child in node.children]
    resp = gateway.complete_structured(
        PromptRequest(
            _rid("super"),
            TemplateId.TAXO_SUPERCLASS,
            {
                "branches": "\n".join(branches),
                "class_name": class_name,
                "node_name": node.class_name,
            },
        )
    )
    if not resp.ok or not isinstance(resp.payload, dict):
        return None
    choice = resp.payload.get("choice")
    if not isinstance(choice, str):
        return None
    choice = choice.strip()
    if choice == _NULL_ANSWER or choice not in branches:
        # anything that is not the exact name of a branch counts as NULL
        return None
    return choice


def _ask_update(gateway: LlmGateway, node: TaxonomyNode, class_name: str) -> tuple[TaxonomyNode | None, bool]:
    """Returns (updated subtree or None, whether the model answered at all)."""
    resp = gateway.complete_structured(
        PromptRequest(
            _rid("update"),
            TemplateId.TAXO_UPDATE,
            {
                "taxonomy": taxonomy_to_json(node),
                "class_name": class_name,
                "node_name": node.class_name,
            },
        )
    )
    if not resp.ok:
        return None, False
    return taxonomy_from_payload(resp.payload), True


def _valid_update(
    node: TaxonomyNode, updated: TaxonomyNode | None, class_name: str, tree_names: set[str]
) -> bool:
    if updated is None:
        return False
    if updated.class_name != node.class_name:
        return False
    new_names = updated.names()
    if class_name not in new_names:
        return False
    old_names = node.names()
    if not old_names <= new_names:
        return False
    outside = tree_names - old_names
    if new_names & outside:
        return False
    return True


def insert_class_recursive(
    node: TaxonomyNode,
    class_name: str,
    gateway: LlmGateway,
    score: int | None = None,
    tree_names: set[str] | None = None,
) -> None:
    """Place class_name somewhere in node's subtree, mutating in place."""
    if tree_names is None:
        tree_names = node.names()
    if node.children:
        choice = _ask_superclass(gateway, node, class_name)
        if choice is not None:
            child = next(c for c in node.children if c.class_name == choice)
            insert_class_recursive(child, class_name, gateway, score, tree_names)
            return
    for _ in range(2):
        updated, answered = _ask_update(gateway, node, class_name)
        if _valid_update(node, updated, class_name, tree_names):
            _transplant(node, updated, class_name, score)
            return
        if answered:
            # a tree came back but broke an invariant; silence says less
            log.warning("rejected taxonomy update at %r for %r", node.class_name, class_name)
        else:
            log.debug("no usable taxonomy update at %r for %r", node.class_name, class_name)
    node.children.append(TaxonomyNode(class_name, generality_score=score))


def _transplant(node: TaxonomyNode, updated: TaxonomyNode, class_name: str, score: int | None) -> None:
    """Adopt the updated subtree, carrying over known generality scores."""
    scores = {n.class_name: n.generality_score for n in node.iter_nodes()}
    scores[class_name] = score
    for fresh in updated.iter_nodes():
        carried = scores.get(fresh.class_name)
        if carried is not None:
            fresh.generality_score = carried
    node.children = updated.children


def build_taxonomy(class_scores: Mapping[str, int], gateway: LlmGateway) -> TaxonomyNode:
    """Seed from the LLM, then insert classes most-general-first."""
    root = _ask_seed(gateway)
    for class_name in sorted(class_scores, key=lambda c: (class_scores[c], c)):
        if root.find(class_name) is not None:
            log.warning("class %r already present in taxonomy, skipping", class_name)
            continue
        insert_class_recursive(root, class_name, gateway, score=class_scores[class_name])
    return root
