"""Demographic skew summaries over the knowledge base.

Counts nationality objects and gender property values directly, and
additionally estimates gender from first names through a pluggable
lexicon, since most person entries state no gender property at all.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Protocol

from kbforge.kbstore.store import KnowledgeBase


class NameGenderLexicon(Protocol):
    def classify(self, first_name: str) -> str | None:  # e.g. "female", "male", None
        ...


class MappingNameLexicon:
    def __init__(self, mapping: Mapping[str, str] | None = None) -> None:
        self._mapping = {k.lower(): v for k, v in (mapping or {}).items()}

    def classify(self, first_name: str) -> str | None:
        return self._mapping.get(first_name.lower())


@dataclass
class BiasReport:
    nationality_counts: list[tuple[str, int]]
    gender_value_counts: list[tuple[str, int]]
    name_gender_estimate: dict[str, int]
    persons_considered: int

    def as_dict(self) -> dict:
        return {
            "nationality_counts": [list(row) for row in self.nationality_counts],
            "gender_value_counts": [list(row) for row in self.gender_value_counts],
            "name_gender_estimate": dict(self.name_gender_estimate),
            "persons_considered": self.persons_considered,
        }


def _descending(counts: Counter[str]) -> list[tuple[str, int]]:
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def bias_report(
    kb: KnowledgeBase,
    nationality_predicate: str = "nationality",
    gender_predicate: str = "gender",
    person_class: str = "Person",
    lexicon: NameGenderLexicon | None = None,
) -> BiasReport:
    nationality: Counter[str] = Counter()
    gender_values: Counter[str] = Counter()
    for record in kb.records():
        for t in record.triples:
            if t.predicate == nationality_predicate:
                nationality[t.object] += 1
            elif t.predicate == gender_predicate:
                gender_values[t.object] += 1

    estimate: Counter[str] = Counter()
    persons = [r for r in kb.records() if person_class in r.classes]
    if lexicon is not None:
        for record in persons:
            first = record.label.split()[0] if record.label.split() else ""
            bucket = lexicon.classify(first) or "unknown"
            estimate[bucket] += 1

    return BiasReport(_descending(nationality), _descending(gender_values), dict(estimate), len(persons))
