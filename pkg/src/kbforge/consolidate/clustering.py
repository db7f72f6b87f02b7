"""Greedy frequency-ordered name clustering for relations and classes.

Names are processed in descending frequency (ties lexicographic). Each
name after the first is compared against every already-processed name;
it joins the best match's cluster when the similarity strictly exceeds a
frequency-adaptive threshold, otherwise it opens a new cluster. The same
routine cleans relation names and class names; only the frequency
counting differs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from kbforge.consolidate.embeddings import EmbeddingProvider
from kbforge.errors import CoverageError
from kbforge.kbstore.store import KnowledgeBase
from kbforge.model import is_instance_of


@dataclass
class ClusteringConfig:
    alpha: float = 1.4
    high_threshold: float = 0.95
    low_threshold: float = 0.75

    def __post_init__(self) -> None:
        if not (0.0 < self.low_threshold <= self.high_threshold <= 1.0):
            raise ValueError("thresholds must satisfy 0 < low <= high <= 1")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")


def adaptive_threshold(freq_r: int, freq_max: int, cfg: ClusteringConfig) -> float:
    """Frequency-adaptive merge cutoff, clipped to [low, high].

    Rarer names get a lower bar: threshold = alpha * ln(freq_r)/ln(freq_max).
    freq_max = 1 would divide by ln(1); defined as the high cutoff.
    """
    if not 1 <= freq_r <= freq_max:
        raise ValueError(f"need 1 <= freq_r <= freq_max, got ({freq_r}, {freq_max})")
    if freq_max == 1:
        return cfg.high_threshold
    raw = cfg.alpha * math.log(freq_r) / math.log(freq_max)
    return min(max(raw, cfg.low_threshold), cfg.high_threshold)


@dataclass
class ClusterMap:
    assignment: dict[str, int] = field(default_factory=dict)
    representatives: dict[int, str] = field(default_factory=dict)
    members: dict[int, dict[str, int]] = field(default_factory=dict)

    def canonical(self, name: str) -> str:
        if name not in self.assignment:
            raise CoverageError(f"name not in cluster map: {name!r}")
        return self.representatives[self.assignment[name]]

    def cluster_count(self) -> int:
        return len(self.representatives)

    def as_rows(self) -> list[dict]:
        rows = []
        for name in sorted(self.assignment):
            cid = self.assignment[name]
            rows.append({"name": name, "cluster": cid, "representative": self.representatives[cid]})
        return rows


def cluster_names(
    frequencies: Mapping[str, int],
    cfg: ClusteringConfig,
    embedder: EmbeddingProvider,
) -> ClusterMap:
    if not frequencies:
        raise ValueError("no names to cluster")
    for name, freq in frequencies.items():
        if freq < 1:
            raise ValueError(f"frequency must be >= 1, got {freq} for {name!r}")

    order = sorted(frequencies, key=lambda n: (-frequencies[n], n))
    freq_max = frequencies[order[0]]

    cmap = ClusterMap()
    cmap.assignment[order[0]] = 0
    cmap.representatives[0] = order[0]
    cmap.members[0] = {order[0]: frequencies[order[0]]}

    for idx in range(1, len(order)):
        r = order[idx]
        # earlier names are already in (freq desc, lex asc) order, so the
        # first maximum encountered is the argmax with the right tie-break
        best_name = order[0]
        best_sim = embedder.similarity(r, order[0])
        for s in order[1:idx]:
            sim = embedder.similarity(r, s)
            if sim > best_sim:
                best_sim = sim
                best_name = s
        threshold = adaptive_threshold(frequencies[r], freq_max, cfg)
        if best_sim > threshold:
            cid = cmap.assignment[best_name]
        else:
            cid = len(cmap.representatives)
            cmap.representatives[cid] = r
            cmap.members[cid] = {}
        cmap.assignment[r] = cid
        cmap.members[cid][r] = frequencies[r]
    return cmap


def relation_frequencies(kb: KnowledgeBase) -> Counter[str]:
    """Frequency of a relation = number of triples using its raw name."""
    counts: Counter[str] = Counter()
    for record in kb.records():
        for t in record.triples:
            counts[t.predicate_raw] += 1
    return counts


def class_frequencies(kb: KnowledgeBase) -> Counter[str]:
    """Frequency of a class = instance-of triples naming it, by raw object.

    Uses the effective predicate so relation clustering (run first) folds
    instanceOf variants together before classes are counted.
    """
    counts: Counter[str] = Counter()
    for record in kb.records():
        for t in record.triples:
            if is_instance_of(t.predicate):
                counts[t.object_value] += 1
    return counts


@dataclass
class RewriteReport:
    kind: str
    raw_names: int
    canonical_names: int
    triples_rewritten: int
    triples_scanned: int

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "raw_names": self.raw_names,
            "canonical_names": self.canonical_names,
            "triples_rewritten": self.triples_rewritten,
            "triples_scanned": self.triples_scanned,
        }


def apply_cluster_map(kb: KnowledgeBase, cmap: ClusterMap, kind: str) -> RewriteReport:
    """Stamp canonical names onto triples. Rewrites only, never deletes.

    Coverage is checked before any mutation so a gap in the map leaves
    the store untouched.
    """
    if kind not in ("relation", "class"):
        raise ValueError(f"kind must be 'relation' or 'class', got {kind!r}")

    if kind == "relation":
        raw_names = {t.predicate_raw for r in kb.records() for t in r.triples}
    else:
        raw_names = {
            t.object_value for r in kb.records() for t in r.triples if is_instance_of(t.predicate)
        }
    missing = sorted(n for n in raw_names if n not in cmap.assignment)
    if missing:
        raise CoverageError(f"cluster map missing {len(missing)} {kind} name(s): {missing[:5]}")

    rewritten = 0
    scanned = 0
    canonical_seen: set[str] = set()
    for record in kb.records():
        for t in record.triples:
            scanned += 1
            if kind == "relation":
                rep = cmap.canonical(t.predicate_raw)
                canonical_seen.add(rep)
                if rep != t.predicate:
                    rewritten += 1
                t.predicate_canonical = rep
            elif is_instance_of(t.predicate):
                rep = cmap.canonical(t.object_value)
                canonical_seen.add(rep)
                if rep != t.object:
                    rewritten += 1
                t.object_canonical = rep
    return RewriteReport(kind, len(raw_names), len(canonical_seen), rewritten, scanned)
