"""Training-cutoff detection from year-valued triples.

A model's knowledge thins out sharply after its training cutoff, so the
per-year histogram of year literals shows a cliff: the estimate is the
latest well-supported year whose successor's count collapses below a
drop ratio. Years with no successor data are not treated as cliffs.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from kbforge.kbstore.store import KnowledgeBase
from kbforge.model import ObjectKind

_YEAR_RE = re.compile(r"^\s*(\d{4})\s*$")

DEFAULT_DROP_RATIO = 0.25
DEFAULT_MIN_SUPPORT = 50


@dataclass
class CutoffReport:
    predicate: str | None
    counts: dict[int, int]
    cutoff: int | None
    drop_ratio: float
    min_support: int

    def as_dict(self) -> dict:
        return {
            "predicate": self.predicate,
            "counts": {str(y): n for y, n in sorted(self.counts.items())},
            "cutoff": self.cutoff,
            "drop_ratio": self.drop_ratio,
            "min_support": self.min_support,
        }


def year_counts(values: Iterable[str]) -> Counter[int]:
    counts: Counter[int] = Counter()
    for value in values:
        m = _YEAR_RE.match(value)
        if m:
            counts[int(m.group(1))] += 1
    return counts


def detect_cutoff(
    counts: Mapping[int, int],
    drop_ratio: float = DEFAULT_DROP_RATIO,
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> int | None:
    candidates = [
        year
        for year, n in counts.items()
        if n >= min_support and (year + 1) in counts and counts[year + 1] / n < drop_ratio
    ]
    return max(candidates) if candidates else None


def year_histogram(
    kb: KnowledgeBase,
    year_predicate: str,
    drop_ratio: float = DEFAULT_DROP_RATIO,
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> CutoffReport:
    values = [
        t.object
        for record in kb.records()
        for t in record.triples
        if t.predicate == year_predicate and t.object_kind is ObjectKind.LITERAL
    ]
    counts = year_counts(values)
    cutoff = detect_cutoff(counts, drop_ratio, min_support)
    return CutoffReport(year_predicate, dict(counts), cutoff, drop_ratio, min_support)
