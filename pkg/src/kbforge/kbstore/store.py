"""Label-keyed triple store.

Entities are addressed by their normalized label; there are no numeric
ids anywhere in the data. Deduplication folds losing labels into the
winner's record and leaves an alias behind, so old labels keep resolving.
One writer appends during a crawl while readers may query concurrently;
the store serializes access behind one lock.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from kbforge.model import ElicitationResult, ObjectKind, ParseStatus, Provenance, SubjectStatus, Triple, is_instance_of

_STATUS_FOR = {
    ParseStatus.OK: SubjectStatus.DONE_NONEMPTY,
    ParseStatus.EMPTY: SubjectStatus.DONE_EMPTY,
    ParseStatus.PARSE_FAILED: SubjectStatus.PARSE_FAILED,
}


@dataclass
class EntityRecord:
    label: str
    depth: int
    status: SubjectStatus
    has_instance_of: bool = False
    triples: list[Triple] = field(default_factory=list)
    aliases: list[str] = field(default_factory=list)

    def triple_keys(self) -> set[tuple[str, str]]:
        return {(t.predicate_raw, t.object_value) for t in self.triples}

    @property
    def classes(self) -> list[str]:
        seen: list[str] = []
        for t in self.triples:
            if is_instance_of(t.predicate) and t.object not in seen:
                seen.append(t.object)
        return seen


class KnowledgeBase:
    def __init__(self) -> None:
        self._records: dict[str, EntityRecord] = {}
        self._aliases: dict[str, str] = {}
        self._lock = threading.RLock()

    # -- writes --------------------------------------------------------------

    def insert_triples(self, result: ElicitationResult, depth: int) -> int:
        """Idempotent insert: exact (predicate_raw, object_value) duplicates
        within a subject's record collapse. Returns how many were new."""
        with self._lock:
            record = self._records.get(result.subject)
            if record is None:
                record = EntityRecord(
                    label=result.subject,
                    depth=depth,
                    status=_STATUS_FOR[result.parse_status],
                    has_instance_of=result.has_instance_of,
                )
                self._records[result.subject] = record
            else:
                record.status = _STATUS_FOR[result.parse_status]
                record.has_instance_of = record.has_instance_of or result.has_instance_of
            existing = record.triple_keys()
            added = 0
            for t in result.triples:
                key = (t.predicate_raw, t.object_value)
                if key in existing:
                    continue
                existing.add(key)
                record.triples.append(t)
                added += 1
            return added

    def merge_entities(self, winner: str, losers: list[str]) -> int:
        """Fold loser records into the winner; losers become aliases.

        Triples are unioned under the collapse key; the winner keeps its
        depth. Returns the number of triples carried over."""
        with self._lock:
            target = self._records[winner]
            existing = target.triple_keys()
            carried = 0
            for loser in losers:
                if loser == winner:
                    continue
                record = self._records.pop(loser)
                for t in record.triples:
                    key = (t.predicate_raw, t.object_value)
                    if key in existing:
                        continue
                    existing.add(key)
                    t.subject = winner
                    target.triples.append(t)
                    carried += 1
                target.aliases.append(loser)
                target.aliases.extend(record.aliases)
                for alias, canon in list(self._aliases.items()):
                    if canon == loser:
                        self._aliases[alias] = winner
                self._aliases[loser] = winner
            return carried

    # -- reads ---------------------------------------------------------------

    def query_subject(self, label: str) -> EntityRecord | None:
        with self._lock:
            label = self._aliases.get(label, label)
            return self._records.get(label)

    def query_class(self, class_name: str) -> list[str]:
        with self._lock:
            return [r.label for r in self._records.values() if class_name in r.classes]

    def records(self) -> list[EntityRecord]:
        with self._lock:
            return list(self._records.values())

    def labels(self) -> list[str]:
        with self._lock:
            return list(self._records)

    def alias_map(self) -> dict[str, str]:
        with self._lock:
            return dict(self._aliases)

    def all_triples(self) -> Iterator[Triple]:
        for record in self.records():
            yield from record.triples

    def entity_count(self) -> int:
        with self._lock:
            return len(self._records)

    def triple_count(self) -> int:
        with self._lock:
            return sum(len(r.triples) for r in self._records.values())

    # -- persistence -----------------------------------------------------------

    def save(self, path: str | Path) -> None:
        with self._lock, open(path, "w", encoding="utf-8") as fh:
            for record in self._records.values():
                doc = {
                    "label": record.label,
                    "depth": record.depth,
                    "status": record.status.value,
                    "has_instance_of": record.has_instance_of,
                    "aliases": record.aliases,
                    "triples": [
                        {
                            "p": t.predicate_raw,
                            "pc": t.predicate_canonical,
                            "o": t.object_value,
                            "oc": t.object_canonical,
                            "k": t.object_kind.value,
                            "layer": t.provenance.layer,
                            "batch": t.provenance.batch_id,
                            "model": t.provenance.model_id,
                        }
                        for t in record.triples
                    ],
                }
                fh.write(json.dumps(doc, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        kb = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                doc = json.loads(line)
                record = EntityRecord(
                    label=doc["label"],
                    depth=doc["depth"],
                    status=SubjectStatus(doc["status"]),
                    has_instance_of=doc["has_instance_of"],
                    aliases=list(doc["aliases"]),
                )
                for t in doc["triples"]:
                    record.triples.append(
                        Triple(
                            subject=record.label,
                            predicate_raw=t["p"],
                            object_value=t["o"],
                            object_kind=ObjectKind(t["k"]),
                            provenance=Provenance(layer=t["layer"], batch_id=t["batch"], model_id=t["model"]),
                            predicate_canonical=t["pc"],
                            object_canonical=t["oc"],
                        )
                    )
                kb._records[record.label] = record
                for alias in record.aliases:
                    kb._aliases[alias] = record.label
        return kb
