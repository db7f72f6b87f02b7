"""Blocking-based entity deduplication.

Only entities of the target class that carry the blocking predicate are
considered; candidates sharing an exact blocking value form a block.
Within a block, two entities are duplicates when their labels are close
in embedding space AND they share enough exact triples. The duplicate
relation closes transitively (union-find) and each group merges into its
largest member.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from kbforge.consolidate.embeddings import EmbeddingProvider
from kbforge.kbstore.store import EntityRecord, KnowledgeBase


@dataclass
class DedupConfig:
    label_similarity_threshold: float = 0.85
    triple_overlap_threshold: float = 0.30
    blocking_predicate: str = "birthDate"
    target_class: str = "Person"

    def __post_init__(self) -> None:
        for value in (self.label_similarity_threshold, self.triple_overlap_threshold):
            if not (0.0 < value <= 1.0):
                raise ValueError(f"threshold must be in (0, 1], got {value}")


@dataclass
class MergeReport:
    target_class: str
    blocking_predicate: str
    blocks: int = 0
    candidate_pairs: int = 0
    duplicate_pairs: int = 0
    merges: list[dict] = field(default_factory=list)

    @property
    def entities_absorbed(self) -> int:
        return sum(len(m["losers"]) for m in self.merges)

    def as_dict(self) -> dict:
        return {
            "target_class": self.target_class,
            "blocking_predicate": self.blocking_predicate,
            "blocks": self.blocks,
            "candidate_pairs": self.candidate_pairs,
            "duplicate_pairs": self.duplicate_pairs,
            "entities_absorbed": self.entities_absorbed,
            "merges": self.merges,
        }


def _blocking_value(record: EntityRecord, predicate: str) -> str | None:
    # several stated values: block on the lexicographically least
    values = sorted(t.object for t in record.triples if t.predicate == predicate)
    return values[0] if values else None


def _canonical_keys(record: EntityRecord) -> set[tuple[str, str]]:
    return {(t.predicate, t.object) for t in record.triples}


def _is_duplicate_pair(
    a: EntityRecord, b: EntityRecord, cfg: DedupConfig, embedder: EmbeddingProvider
) -> bool:
    if embedder.similarity(a.label, b.label) <= cfg.label_similarity_threshold:
        return False
    keys_a = _canonical_keys(a)
    keys_b = _canonical_keys(b)
    floor = min(len(keys_a), len(keys_b))
    if floor == 0:
        return False
    overlap = len(keys_a & keys_b) / floor
    return overlap >= cfg.triple_overlap_threshold


class _UnionFind:
    def __init__(self, items: list[str]) -> None:
        self._parent = {item: item for item in items}

    def find(self, item: str) -> str:
        root = item
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[item] != root:
            self._parent[item], item = root, self._parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self._parent[rb] = ra

    def groups(self) -> list[list[str]]:
        by_root: dict[str, list[str]] = {}
        for item in self._parent:
            by_root.setdefault(self.find(item), []).append(item)
        return [sorted(members) for members in by_root.values()]


def dedup_entities(
    kb: KnowledgeBase, cfg: DedupConfig, embedder: EmbeddingProvider
) -> MergeReport:
    report = MergeReport(cfg.target_class, cfg.blocking_predicate)

    blocks: dict[str, list[str]] = {}
    for record in kb.records():
        if cfg.target_class not in record.classes:
            continue
        value = _blocking_value(record, cfg.blocking_predicate)
        if value is None:
            continue
        blocks.setdefault(value, []).append(record.label)

    for value in sorted(blocks):
        members = sorted(blocks[value])
        if len(members) < 2:
            continue
        report.blocks += 1
        uf = _UnionFind(members)
        for i, label_a in enumerate(members):
            for label_b in members[i + 1 :]:
                report.candidate_pairs += 1
                rec_a = kb.query_subject(label_a)
                rec_b = kb.query_subject(label_b)
                if _is_duplicate_pair(rec_a, rec_b, cfg, embedder):
                    report.duplicate_pairs += 1
                    uf.union(label_a, label_b)
        for group in uf.groups():
            if len(group) < 2:
                continue
            # winner: most triples, ties broken by lexicographically least label
            winner = min(group, key=lambda lbl: (-len(kb.query_subject(lbl).triples), lbl))
            losers = [lbl for lbl in group if lbl != winner]
            carried = kb.merge_entities(winner, losers)
            report.merges.append(
                {"winner": winner, "losers": losers, "block": value, "triples_carried": carried}
            )
    return report
