"""Store statistics with exact rational averages.

Averages are Fractions, never floats: the counters feed acceptance checks
that demand exact arithmetic, and Fraction(140, 4) == 35 is a statement a
float cannot make.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from kbforge.kbstore.store import KnowledgeBase
from kbforge.model import ObjectKind, is_instance_of


@dataclass
class LayerSlice:
    entities: int = 0
    triples: int = 0


@dataclass
class KbStats:
    entity_count: int = 0
    triple_count: int = 0
    relation_count_raw: int = 0
    relation_count_canonical: int = 0
    class_count_raw: int = 0
    class_count_canonical: int = 0
    entity_object_count: int = 0
    literal_object_count: int = 0
    avg_triples_per_entity: Fraction = Fraction(0)
    avg_label_length: Fraction = Fraction(0)
    per_layer: dict[int, LayerSlice] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "entity_count": self.entity_count,
            "triple_count": self.triple_count,
            "relation_count_raw": self.relation_count_raw,
            "relation_count_canonical": self.relation_count_canonical,
            "class_count_raw": self.class_count_raw,
            "class_count_canonical": self.class_count_canonical,
            "entity_object_count": self.entity_object_count,
            "literal_object_count": self.literal_object_count,
            "avg_triples_per_entity": float(self.avg_triples_per_entity),
            "avg_triples_per_entity_exact": str(self.avg_triples_per_entity),
            "avg_label_length": float(self.avg_label_length),
            "avg_label_length_exact": str(self.avg_label_length),
            "per_layer": {
                str(d): {"entities": s.entities, "triples": s.triples} for d, s in sorted(self.per_layer.items())
            },
        }


def compute_stats(kb: KnowledgeBase) -> KbStats:
    stats = KbStats()
    raw_relations: set[str] = set()
    canon_relations: set[str] = set()
    raw_classes: set[str] = set()
    canon_classes: set[str] = set()
    label_length_total = 0

    for record in kb.records():
        stats.entity_count += 1
        label_length_total += len(record.label)
        layer_slice = stats.per_layer.setdefault(record.depth, LayerSlice())
        layer_slice.entities += 1
        for t in record.triples:
            stats.triple_count += 1
            stats.per_layer.setdefault(t.provenance.layer, LayerSlice()).triples += 1
            raw_relations.add(t.predicate_raw)
            canon_relations.add(t.predicate)
            if is_instance_of(t.predicate_raw):
                raw_classes.add(t.object_value)
            if is_instance_of(t.predicate):
                canon_classes.add(t.object)
            if t.object_kind is ObjectKind.NAMED_ENTITY:
                stats.entity_object_count += 1
            else:
                stats.literal_object_count += 1

    stats.relation_count_raw = len(raw_relations)
    stats.relation_count_canonical = len(canon_relations)
    stats.class_count_raw = len(raw_classes)
    stats.class_count_canonical = len(canon_classes)
    if stats.entity_count:
        stats.avg_triples_per_entity = Fraction(stats.triple_count, stats.entity_count)
        stats.avg_label_length = Fraction(label_length_total, stats.entity_count)
    return stats
