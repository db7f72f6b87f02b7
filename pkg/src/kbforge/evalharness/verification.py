"""Entity and triple verification against search snippets.

Each sampled item is verified independently: fetch snippets, ask the
judge, record the verdict. Transport or judge failures are retried once
and then excluded from the rates with an error flag, so flaky services
bias sample size, never the rates themselves. Headline rates are also
reported as a weighted average across BFS layers, weighted by how much
of the KB lives in each layer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from kbforge.errors import ProviderError, TransportError
from kbforge.evalharness.providers import (
    EntityVerdict,
    JudgeProvider,
    SearchProvider,
    TripleVerdict,
)
from kbforge.kbstore.store import KnowledgeBase
from kbforge.model import Triple

_SEARCH_K = 5


@dataclass(frozen=True)
class VerificationOutcome:
    verdict: EntityVerdict | TripleVerdict | None
    error: bool = False
    reason: str | None = None


def verify_entity(label: str, search: SearchProvider, judge: JudgeProvider) -> VerificationOutcome:
    try:
        snippets = _search_with_retry(search, label)
    except (TransportError, ProviderError) as exc:
        return VerificationOutcome(EntityVerdict.UNVERIFIABLE, error=True, reason=str(exc))
    if not snippets:
        return VerificationOutcome(EntityVerdict.UNVERIFIABLE)
    try:
        verdict = _judge_with_retry(lambda: judge.judge_entity(label, snippets))
    except (TransportError, ProviderError) as exc:
        return VerificationOutcome(EntityVerdict.UNVERIFIABLE, error=True, reason=str(exc))
    return VerificationOutcome(verdict)


def verify_triple(triple: Triple, search: SearchProvider, judge: JudgeProvider) -> VerificationOutcome:
    query = f"{triple.subject} {triple.object}"
    claim = f"{triple.subject} {triple.predicate} {triple.object}"
    try:
        snippets = _search_with_retry(search, query)
    except (TransportError, ProviderError) as exc:
        return VerificationOutcome(None, error=True, reason=str(exc))
    # zero snippets do not force a verdict here; the judge decides with
    # an empty context (unlike entities, where no evidence means unverifiable)
    try:
        verdict = _judge_with_retry(lambda: judge.judge_triple(claim, snippets))
    except (TransportError, ProviderError) as exc:
        return VerificationOutcome(None, error=True, reason=str(exc))
    return VerificationOutcome(verdict)


def _search_with_retry(search: SearchProvider, query: str) -> list[dict]:
    try:
        return search.search(query, _SEARCH_K)
    except TransportError:
        return search.search(query, _SEARCH_K)


def _judge_with_retry(call):
    try:
        return call()
    except (TransportError, ProviderError):
        return call()


def weighted_layer_average(
    layer_rates: Mapping[int, Fraction | float], layer_weights: Mapping[int, int]
) -> Fraction:
    """Average the per-layer rates, weighted by KB mass per layer.

    Only layers that actually have a rate participate; their weights are
    renormalized over that subset.
    """
    total = sum(layer_weights.get(layer, 0) for layer in layer_rates)
    if total == 0:
        return Fraction(0)
    acc = Fraction(0)
    for layer, rate in layer_rates.items():
        acc += Fraction(rate) * layer_weights.get(layer, 0)
    return acc / total


@dataclass
class _RateTally:
    counts: dict[str, int] = field(default_factory=dict)
    total: int = 0

    def add(self, verdict: str) -> None:
        self.counts[verdict] = self.counts.get(verdict, 0) + 1
        self.total += 1

    def rates(self, levels: tuple[str, ...]) -> dict[str, Fraction]:
        if self.total == 0:
            return {level: Fraction(0) for level in levels}
        return {level: Fraction(self.counts.get(level, 0), self.total) for level in levels}


@dataclass
class EntityRateReport:
    sample_size: int
    seed: int
    counts: dict[str, int]
    rates: dict[str, Fraction]
    weighted_rates: dict[str, Fraction]
    per_layer: dict[int, dict]
    errors_excluded: int
    outcomes: dict[str, VerificationOutcome] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return _report_dict(self)


@dataclass
class TripleRateReport:
    sample_size: int
    seed: int
    counts: dict[str, int]
    rates: dict[str, Fraction]
    weighted_rates: dict[str, Fraction]
    per_layer: dict[int, dict]
    errors_excluded: int

    def as_dict(self) -> dict:
        return _report_dict(self)


def _report_dict(report) -> dict:
    return {
        "sample_size": report.sample_size,
        "seed": report.seed,
        "counts": dict(report.counts),
        "rates": {k: float(v) for k, v in report.rates.items()},
        "weighted_rates": {k: float(v) for k, v in report.weighted_rates.items()},
        "per_layer": {
            layer: {
                "weight": info["weight"],
                "counts": dict(info["counts"]),
                "rates": {k: float(v) for k, v in info["rates"].items()},
            }
            for layer, info in report.per_layer.items()
        },
        "errors_excluded": report.errors_excluded,
    }


def _sample(population: list, size: int | None, seed: int) -> list:
    if size is None or size >= len(population):
        return list(population)
    return random.Random(seed).sample(population, size)


def _assemble(
    levels: tuple[str, ...],
    tallies: dict[int, _RateTally],
    weights: Mapping[int, int],
) -> tuple[dict[str, int], dict[str, Fraction], dict[str, Fraction], dict[int, dict]]:
    overall = _RateTally()
    per_layer: dict[int, dict] = {}
    for layer in sorted(tallies):
        tally = tallies[layer]
        for verdict, n in tally.counts.items():
            overall.counts[verdict] = overall.counts.get(verdict, 0) + n
        overall.total += tally.total
        per_layer[layer] = {
            "weight": weights.get(layer, 0),
            "counts": tally.counts,
            "rates": tally.rates(levels),
        }
    weighted = {
        level: weighted_layer_average(
            {layer: per_layer[layer]["rates"][level] for layer in per_layer}, weights
        )
        for level in levels
    }
    return overall.counts, overall.rates(levels), weighted, per_layer


def entity_rate_report(
    kb: KnowledgeBase,
    search: SearchProvider,
    judge: JudgeProvider,
    sample_size: int | None = None,
    seed: int = 0,
) -> EntityRateReport:
    labels = sorted(kb.labels())
    sampled = _sample(labels, sample_size, seed)
    weights: dict[int, int] = {}
    for record in kb.records():
        weights[record.depth] = weights.get(record.depth, 0) + 1

    levels = tuple(v.value for v in EntityVerdict)
    tallies: dict[int, _RateTally] = {}
    errors = 0
    outcomes: dict[str, VerificationOutcome] = {}
    for label in sampled:
        outcome = verify_entity(label, search, judge)
        outcomes[label] = outcome
        if outcome.error:
            errors += 1
            continue
        layer = kb.query_subject(label).depth
        tallies.setdefault(layer, _RateTally()).add(outcome.verdict.value)

    counts, rates, weighted, per_layer = _assemble(levels, tallies, weights)
    return EntityRateReport(len(sampled), seed, counts, rates, weighted, per_layer, errors, outcomes)


def triple_rate_report(
    kb: KnowledgeBase,
    search: SearchProvider,
    judge: JudgeProvider,
    sample_size: int | None = None,
    seed: int = 0,
) -> TripleRateReport:
    triples = sorted(kb.all_triples(), key=lambda t: (t.subject, t.predicate_raw, t.object_value))
    sampled = _sample(triples, sample_size, seed)
    weights: dict[int, int] = {}
    for t in kb.all_triples():
        layer = t.provenance.layer
        weights[layer] = weights.get(layer, 0) + 1

    levels = tuple(v.value for v in TripleVerdict)
    tallies: dict[int, _RateTally] = {}
    errors = 0
    for t in sampled:
        outcome = verify_triple(t, search, judge)
        if outcome.error:
            errors += 1
            continue
        tallies.setdefault(t.provenance.layer, _RateTally()).add(outcome.verdict.value)

    counts, rates, weighted, per_layer = _assemble(levels, tallies, weights)
    return TripleRateReport(len(sampled), seed, counts, rates, weighted, per_layer, errors)
