"""Breadth-first crawl: elicit per subject, NER-filter objects, expand.

Layer discipline is strict: every depth-d subject is elicited before any
depth-(d+1) subject, and no label is ever prompted twice. Each layer is
checkpointed after its object kinds are resolved, so a resumed crawl
replays the checkpoint and continues exactly where the original stopped,
producing the same triples as an uninterrupted run against the same world.

Batch ids are derived from a subject's position in its layer's discovery
order, never from submission timing, which keeps provenance identical
between interrupted and uninterrupted runs.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from kbforge.crawler.checkpoint import CheckpointRecord, append_records, load_checkpoint, record_for
from kbforge.crawler.labels import normalize_label, screens_as_literal
from kbforge.crawler.ner import NerClassifier
from kbforge.errors import BudgetExceededError, CheckpointError, ProviderError
from kbforge.gateway.gateway import BatchState, LlmGateway
from kbforge.gateway.ledger import LedgerSnapshot
from kbforge.gateway.templates import PromptRequest, StructuredResponse, TemplateId
from kbforge.model import (
    ElicitationResult,
    FrontierEntry,
    ObjectKind,
    ParseStatus,
    Provenance,
    SubjectStatus,
    Triple,
    is_instance_of,
)

log = logging.getLogger(__name__)

_STATUS_FOR = {
    ParseStatus.OK: SubjectStatus.DONE_NONEMPTY,
    ParseStatus.EMPTY: SubjectStatus.DONE_EMPTY,
    ParseStatus.PARSE_FAILED: SubjectStatus.PARSE_FAILED,
}


@dataclass
class CrawlConfig:
    seed: str
    max_depth: int = 10
    elicit_batch_size: int = 200
    ner_batch_size: int = 100
    parse_cap: int = 500
    checkpoint_path: str | Path | None = None


@dataclass
class LayerStats:
    prompted: int = 0
    nonempty: int = 0
    empty: int = 0
    parse_failed: int = 0
    new_entities: int = 0

    def count(self, status: ParseStatus) -> None:
        self.prompted += 1
        if status is ParseStatus.OK:
            self.nonempty += 1
        elif status is ParseStatus.EMPTY:
            self.empty += 1
        else:
            self.parse_failed += 1


@dataclass
class CrawlReport:
    layers: dict[int, LayerStats] = field(default_factory=dict)
    total_triples: int = 0
    wall_clock_seconds: float = 0.0
    cost: LedgerSnapshot | None = None
    halted: str | None = None
    resumed: bool = False

    def as_dict(self) -> dict:
        return {
            "layers": {
                str(d): {
                    "prompted": s.prompted,
                    "nonempty": s.nonempty,
                    "empty": s.empty,
                    "parse_failed": s.parse_failed,
                    "new_entities": s.new_entities,
                }
                for d, s in sorted(self.layers.items())
            },
            "total_triples": self.total_triples,
            "wall_clock_seconds": self.wall_clock_seconds,
            "cost": self.cost.as_dict() if self.cost else None,
            "halted": self.halted,
            "resumed": self.resumed,
        }


class Crawler:
    def __init__(self, gateway: LlmGateway, store, config: CrawlConfig) -> None:
        self.gateway = gateway
        self.store = store
        self.config = config
        self.ner = NerClassifier(gateway, batch_size=config.ner_batch_size)
        self.visited: dict[str, FrontierEntry] = {}
        self.layer_order: dict[int, list[str]] = {}
        self.completed: set[str] = set()

    # -- public entry --------------------------------------------------------

    def run(self) -> CrawlReport:
        start = time.monotonic()
        seed = normalize_label(self.config.seed)
        report = CrawlReport()

        deferred: list[CheckpointRecord] = []
        path = self.config.checkpoint_path
        existing = load_checkpoint(path) if path and os.path.exists(path) else []
        if existing:
            report.resumed = True
            deferred = self._replay(existing, seed, report.layers)
        else:
            self.visited[seed] = FrontierEntry(seed, 1)
            self.layer_order[1] = [seed]

        if deferred:
            halted = self._resolve_deferred(deferred, report)
            if halted:
                return self._finalize(report, start, halted)

        depth = 1
        while depth <= self.config.max_depth:
            layer = self.layer_order.get(depth, [])
            if not layer:
                break
            pending = [label for label in layer if label not in self.completed]
            stats = report.layers.setdefault(depth, LayerStats())
            if pending:
                halted = self._process_layer(depth, layer, pending, stats)
                if halted:
                    return self._finalize(report, start, halted)
            depth += 1

        return self._finalize(report, start, None)

    def _finalize(self, report: CrawlReport, start: float, halted: str | None) -> CrawlReport:
        report.halted = halted
        report.total_triples = self.store.triple_count()
        report.wall_clock_seconds = time.monotonic() - start
        report.cost = self.gateway.ledger.snapshot()
        return report

    # -- resume --------------------------------------------------------------

    def _replay(self, records: list[CheckpointRecord], seed: str, layers: dict[int, LayerStats]) -> list[CheckpointRecord]:
        """Rebuild crawl state from checkpoint records, in record order.

        Returns the suffix of records whose object kinds are not yet
        resolved (a budget halt writes those); they are inserted and
        expanded by the caller once NER can run again.
        """
        if records[0].subject != seed or records[0].depth != 1:
            raise CheckpointError(
                f"checkpoint starts at {records[0].subject!r} depth {records[0].depth}, expected seed {seed!r} at depth 1"
            )
        self.visited[seed] = FrontierEntry(seed, 1)
        self.layer_order[1] = [seed]

        defer_from = len(records)
        for i, rec in enumerate(records):
            if any(t["kind"] == ObjectKind.ENTITY_CANDIDATE.value for t in rec.triples):
                defer_from = i
                break

        deferred: list[CheckpointRecord] = []
        for i, rec in enumerate(records):
            self.completed.add(rec.subject)
            result = rec.to_result()
            layers.setdefault(rec.depth, LayerStats()).count(result.parse_status)
            for t in result.triples:
                if t.object_kind is ObjectKind.NAMED_ENTITY:
                    self.ner.seed_cache(t.object_value, True)
                elif t.object_kind is ObjectKind.LITERAL and not screens_as_literal(t.object_value):
                    self.ner.seed_cache(t.object_value, False)
            if i >= defer_from:
                # expansion of these happens in _resolve_deferred, so later
                # deferred subjects may not be in the frontier yet; their
                # validation is deferred along with them
                deferred.append(rec)
                continue
            entry = self.visited.get(rec.subject)
            if entry is None or entry.depth != rec.depth:
                raise CheckpointError(
                    f"checkpoint record {i + 1} for {rec.subject!r} does not match the frontier; wrong world or config?"
                )
            entry.status = SubjectStatus(rec.status)
            self.store.insert_triples(result, rec.depth)
            self._expand(result, rec.depth, layers[rec.depth])
        return deferred

    def _resolve_deferred(self, deferred: list[CheckpointRecord], report: CrawlReport) -> str | None:
        """Finish NER for records checkpointed before their kinds resolved."""
        results = [rec.to_result() for rec in deferred]
        candidates = [
            t.object_value for r in results for t in r.triples if t.object_kind is ObjectKind.ENTITY_CANDIDATE
        ]
        try:
            verdicts = self.ner.classify(candidates)
        except (BudgetExceededError, ProviderError) as exc:
            # checkpoint already holds these records; nothing new to write
            log.warning("halting again while resolving deferred records: %s", exc)
            return "budget" if isinstance(exc, BudgetExceededError) else f"provider: {exc}"
        for rec, result in zip(deferred, results):
            entry = self.visited.get(rec.subject)
            if entry is None or entry.depth != rec.depth:
                raise CheckpointError(
                    f"checkpoint record for {rec.subject!r} does not match the frontier; wrong world or config?"
                )
            entry.status = SubjectStatus(rec.status)
            self._apply_kinds(result, verdicts)
            self.store.insert_triples(result, rec.depth)
            self._expand(result, rec.depth, report.layers[rec.depth])
        return None

    # -- one layer -----------------------------------------------------------

    def _process_layer(self, depth: int, layer: list[str], pending: list[str], stats: LayerStats) -> str | None:
        """Elicit pending subjects, resolve kinds, expand, checkpoint.

        Returns None on success, or a halt reason string.
        """
        position = {label: i for i, label in enumerate(layer)}
        chunks: dict[int, list[str]] = {}
        for label in pending:
            chunks.setdefault(position[label] // self.config.elicit_batch_size, []).append(label)

        handles = []
        for chunk_index in sorted(chunks):
            reqs = [
                PromptRequest(
                    request_id=f"e{depth}-{position[label]:06d}",
                    template_id=TemplateId.ELICIT,
                    variables={"subject": label},
                )
                for label in chunks[chunk_index]
            ]
            handles.append((chunk_index, reqs, self.gateway.submit_batch(reqs)))

        results: list[ElicitationResult] = []
        halt: str | None = None
        for chunk_index, reqs, handle in handles:
            status = self.gateway.wait_batch(handle)
            by_id = {}
            if status.status is BatchState.COMPLETE:
                responses = status.results or []
            else:
                responses = list(status.error_report.get("completed_responses", []))
                kind = status.error_report.get("kind", "provider")
                halt = "budget" if kind == "budget" else f"provider: {status.error_report.get('reason')}"
            for resp in responses:
                by_id[resp.request_id] = resp
            for label in chunks[chunk_index]:
                resp = by_id.get(f"e{depth}-{position[label]:06d}")
                if resp is None:
                    continue  # unprocessed at halt; stays queued for resume
                self.visited[label].status = SubjectStatus.IN_FLIGHT
                results.append(self._parse_result(label, resp, depth, chunk_index))
            if halt:
                break

        if halt:
            self._checkpoint_unresolved(results, depth, stats)
            return halt

        candidates = [
            t.object_value for r in results for t in r.triples if t.object_kind is ObjectKind.ENTITY_CANDIDATE
        ]
        try:
            verdicts = self.ner.classify(candidates)
        except (BudgetExceededError, ProviderError) as exc:
            self._checkpoint_unresolved(results, depth, stats)
            return "budget" if isinstance(exc, BudgetExceededError) else f"provider: {exc}"

        records: list[CheckpointRecord] = []
        for result in results:
            self._apply_kinds(result, verdicts)
            self.visited[result.subject].status = _STATUS_FOR[result.parse_status]
            stats.count(result.parse_status)
            self.store.insert_triples(result, depth)
            self._expand(result, depth, stats)
            records.append(self._record(result, depth))
        self._append_checkpoint(records)
        return None

    def _checkpoint_unresolved(self, results: list[ElicitationResult], depth: int, stats: LayerStats) -> None:
        """Persist what was paid for before a halt; kinds resolve on resume."""
        records = []
        for result in results:
            for t in result.triples:
                if t.object_kind is ObjectKind.ENTITY_CANDIDATE and t.object_value in self.ner.cache:
                    t.object_kind = (
                        ObjectKind.NAMED_ENTITY if self.ner.cache[t.object_value] else ObjectKind.LITERAL
                    )
            self.visited[result.subject].status = _STATUS_FOR[result.parse_status]
            self.completed.add(result.subject)
            stats.count(result.parse_status)
            records.append(self._record(result, depth))
        self._append_checkpoint(records)

    # -- helpers ---------------------------------------------------------------

    def _parse_result(self, subject: str, resp: StructuredResponse, depth: int, chunk_index: int) -> ElicitationResult:
        prov = Provenance(layer=depth, batch_id=f"L{depth}.{chunk_index}", model_id=resp.model_id)
        if resp.parse_status is ParseStatus.PARSE_FAILED:
            return ElicitationResult(subject, [], False, ParseStatus.PARSE_FAILED)
        if resp.parse_status is ParseStatus.EMPTY:
            return ElicitationResult(subject, [], False, ParseStatus.EMPTY)

        triples: list[Triple] = []
        seen: set[tuple[str, str, str]] = set()
        has_instance = False
        for row in resp.payload["triples"][: self.config.parse_cap]:
            predicate = " ".join(str(row["predicate"]).split())
            obj = " ".join(str(row["object"]).split())
            if not predicate or not obj:
                continue
            key = (subject, predicate, obj)
            if key in seen:
                continue
            seen.add(key)
            if is_instance_of(predicate):
                has_instance = True
            kind = ObjectKind.LITERAL if screens_as_literal(obj) else ObjectKind.ENTITY_CANDIDATE
            triples.append(Triple(subject, predicate, obj, kind, prov))
        if not triples:
            return ElicitationResult(subject, [], has_instance, ParseStatus.EMPTY)
        if not has_instance:
            log.debug("subject %r returned no instance-of triple", subject)
        return ElicitationResult(subject, triples, has_instance, ParseStatus.OK)

    def _apply_kinds(self, result: ElicitationResult, verdicts: dict[str, bool]) -> None:
        for t in result.triples:
            if t.object_kind is ObjectKind.ENTITY_CANDIDATE:
                t.object_kind = ObjectKind.NAMED_ENTITY if verdicts.get(t.object_value, False) else ObjectKind.LITERAL

    def _expand(self, result: ElicitationResult, depth: int, stats: LayerStats) -> None:
        if depth >= self.config.max_depth:
            return
        for t in result.triples:
            if t.object_kind is not ObjectKind.NAMED_ENTITY:
                continue
            label = t.object_value
            if label in self.visited:
                continue
            self.visited[label] = FrontierEntry(label, depth + 1)
            self.layer_order.setdefault(depth + 1, []).append(label)
            stats.new_entities += 1

    def _record(self, result: ElicitationResult, depth: int) -> CheckpointRecord:
        self.completed.add(result.subject)
        batch_id = result.triples[0].provenance.batch_id if result.triples else f"L{depth}.-"
        model = result.triples[0].provenance.model_id if result.triples else ""
        return record_for(result, depth, batch_id, model)

    def _append_checkpoint(self, records: list[CheckpointRecord]) -> None:
        if self.config.checkpoint_path and records:
            append_records(self.config.checkpoint_path, records)
