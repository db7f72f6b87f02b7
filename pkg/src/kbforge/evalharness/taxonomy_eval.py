"""Per-edge taxonomy quality assessment.

Two questions per child-parent edge: is the edge correct as stated, and
would the judge still pick the actual parent when offered the parent's
siblings as alternatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from kbforge.consolidate.taxonomy import TaxonomyNode
from kbforge.evalharness.providers import TaxonomyJudge


@dataclass
class TaxonomyEvalReport:
    edges: int
    edge_correct: int
    best_parent_correct: int

    @property
    def edge_accuracy(self) -> Fraction:
        return Fraction(self.edge_correct, self.edges) if self.edges else Fraction(0)

    @property
    def best_parent_accuracy(self) -> Fraction:
        return Fraction(self.best_parent_correct, self.edges) if self.edges else Fraction(0)

    def as_dict(self) -> dict:
        return {
            "edges": self.edges,
            "edge_correct": self.edge_correct,
            "best_parent_correct": self.best_parent_correct,
            "edge_accuracy": float(self.edge_accuracy),
            "best_parent_accuracy": float(self.best_parent_accuracy),
        }


def evaluate_taxonomy(root: TaxonomyNode, judge: TaxonomyJudge) -> TaxonomyEvalReport:
    parent_of: dict[str, str] = {}
    for node in root.iter_nodes():
        for child in node.children:
            parent_of[child.class_name] = node.class_name

    edges = root.edges()
    edge_correct = 0
    best_parent_correct = 0
    for child, parent in edges:
        if judge.edge_correct(child, parent):
            edge_correct += 1
        grandparent = parent_of.get(parent)
        if grandparent is None:
            candidates = [parent]  # the root has no siblings to offer
        else:
            gp_node = root.find(grandparent)
            candidates = sorted(c.class_name for c in gp_node.children)
        if judge.best_parent(child, candidates) == parent:
            best_parent_correct += 1
    return TaxonomyEvalReport(len(edges), edge_correct, best_parent_correct)
