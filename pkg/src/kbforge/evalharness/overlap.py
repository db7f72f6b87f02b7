"""Reference-KB overlap: exact label hits, fuzzy hits, and novel labels.

Each label lands in exactly one bucket, so the three fractions always
sum to 1 over the labels that could be checked. Client failures exclude
the label and are reported rather than silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from kbforge.errors import ProviderError, TransportError
from kbforge.evalharness.providers import ReferenceKbClient


@dataclass
class OverlapReport:
    checked: int
    exact: int
    fuzzy: int
    novel: int
    excluded: list[str] = field(default_factory=list)

    def _fraction(self, count: int) -> Fraction:
        return Fraction(count, self.checked) if self.checked else Fraction(0)

    @property
    def exact_fraction(self) -> Fraction:
        return self._fraction(self.exact)

    @property
    def fuzzy_fraction(self) -> Fraction:
        return self._fraction(self.fuzzy)

    @property
    def novel_fraction(self) -> Fraction:
        return self._fraction(self.novel)

    def as_dict(self) -> dict:
        return {
            "checked": self.checked,
            "exact": self.exact,
            "fuzzy": self.fuzzy,
            "novel": self.novel,
            "exact_fraction": float(self.exact_fraction),
            "fuzzy_fraction": float(self.fuzzy_fraction),
            "novel_fraction": float(self.novel_fraction),
            "excluded": list(self.excluded),
        }


def overlap_report(labels: Sequence[str], client: ReferenceKbClient) -> OverlapReport:
    if not labels:
        raise ValueError("overlap sample must be non-empty")
    exact = fuzzy = novel = 0
    excluded: list[str] = []
    for label in labels:
        try:
            if client.exact_label_lookup(label):
                exact += 1
            elif client.fuzzy_search(label):
                fuzzy += 1
            else:
                novel += 1
        except (TransportError, ProviderError):
            excluded.append(label)
    checked = exact + fuzzy + novel
    if checked == 0:
        raise ValueError("every label was excluded by reference client failures")
    return OverlapReport(checked, exact, fuzzy, novel, excluded)
