"""Repeat-elicitation consistency probing.

The same subject is elicited many times; per-run triple counts tend to
fall into distinct bands rather than one spread. Counts are clustered by
one-dimensional gap splitting, and content stability is measured as the
average pairwise exact-triple Jaccard overlap within the largest band.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from kbforge.errors import KbForgeError
from kbforge.gateway import LlmGateway, PromptRequest, TemplateId
from kbforge.model import ParseStatus

DEFAULT_GAP = 5.0


@dataclass
class ClusterSummary:
    sizes: list[int]

    @property
    def size(self) -> int:
        return len(self.sizes)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.sizes)

    @property
    def stdev(self) -> float:
        return statistics.pstdev(self.sizes) if len(self.sizes) > 1 else 0.0

    def as_dict(self) -> dict:
        return {
            "runs": self.size,
            "mean_triples": self.mean,
            "stdev_triples": self.stdev,
            "min_triples": min(self.sizes),
            "max_triples": max(self.sizes),
        }


@dataclass
class ConsistencyReport:
    subject: str
    n_runs: int
    parse_failures: int
    clusters: list[ClusterSummary]
    largest_cluster_overlap: float
    gap: float
    run_counts: list[int] = field(default_factory=list)

    def largest_cluster(self) -> ClusterSummary:
        return max(self.clusters, key=lambda c: c.size)

    def as_dict(self) -> dict:
        return {
            "subject": self.subject,
            "n_runs": self.n_runs,
            "parse_failures": self.parse_failures,
            "clusters": [c.as_dict() for c in self.clusters],
            "largest_cluster_overlap": self.largest_cluster_overlap,
            "gap": self.gap,
        }


def _split_by_gap(values: list[int], gap: float) -> list[list[int]]:
    ordered = sorted(values)
    clusters: list[list[int]] = [[ordered[0]]]
    for value in ordered[1:]:
        if value - clusters[-1][-1] > gap:
            clusters.append([value])
        else:
            clusters[-1].append(value)
    return clusters


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def consistency_probe(
    subject: str, n_runs: int, gateway: LlmGateway, gap: float = DEFAULT_GAP
) -> ConsistencyReport:
    if n_runs < 2:
        raise ValueError("need at least 2 runs to probe consistency")

    run_counts: list[int] = []
    run_sets: list[frozenset[str]] = []
    parse_failures = 0
    for i in range(n_runs):
        resp = gateway.complete_structured(
            PromptRequest(f"cons-{i:04d}", TemplateId.ELICIT, {"subject": subject})
        )
        if resp.parse_status is ParseStatus.PARSE_FAILED:
            parse_failures += 1
            continue
        rows = resp.payload.get("triples", []) if isinstance(resp.payload, dict) else []
        run_counts.append(len(rows))
        run_sets.append(
            frozenset(f"{r['subject']}\t{r['predicate']}\t{r['object']}" for r in rows)
        )

    if not run_counts:
        raise KbForgeError(f"all {n_runs} elicitation runs failed to parse for {subject!r}")

    clusters = [ClusterSummary(sizes) for sizes in _split_by_gap(run_counts, gap)]
    largest = max(clusters, key=lambda c: c.size)
    lo, hi = min(largest.sizes), max(largest.sizes)
    member_sets = [s for n, s in zip(run_counts, run_sets) if lo <= n <= hi]
    overlaps = [
        _jaccard(member_sets[i], member_sets[j])
        for i in range(len(member_sets))
        for j in range(i + 1, len(member_sets))
    ]
    overlap = statistics.fmean(overlaps) if overlaps else 1.0
    return ConsistencyReport(subject, n_runs, parse_failures, clusters, overlap, gap, run_counts)
