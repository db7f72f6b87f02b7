"""Line-delimited crawl checkpoint: one record per elicited subject.

The checkpoint is the single source of resume truth. Records appear in
processing order, so replaying them rebuilds the visited set, the layer
frontiers, and the NER cache exactly as the original run left them. A torn
final line (killed mid-write) is tolerated; corruption anywhere else is an
error with a line number.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from kbforge.errors import CheckpointError
from kbforge.jsonio import JsonLinesError, read_jsonl
from kbforge.model import ElicitationResult, ObjectKind, ParseStatus, Provenance, SubjectStatus, Triple

_STATUS_FOR_PARSE = {
    ParseStatus.OK: SubjectStatus.DONE_NONEMPTY,
    ParseStatus.EMPTY: SubjectStatus.DONE_EMPTY,
    ParseStatus.PARSE_FAILED: SubjectStatus.PARSE_FAILED,
}

_PARSE_FOR_STATUS = {v.value: k for k, v in _STATUS_FOR_PARSE.items()}

_REQUIRED_FIELDS = ("subject", "depth", "status", "has_instance_of", "batch_id", "model", "triples")


@dataclass
class CheckpointRecord:
    subject: str
    depth: int
    status: str
    has_instance_of: bool
    batch_id: str
    model: str
    triples: list[dict] = field(default_factory=list)

    def to_result(self) -> ElicitationResult:
        prov = Provenance(layer=self.depth, batch_id=self.batch_id, model_id=self.model)
        triples = [
            Triple(
                subject=self.subject,
                predicate_raw=t["predicate"],
                object_value=t["object"],
                object_kind=ObjectKind(t["kind"]),
                provenance=prov,
            )
            for t in self.triples
        ]
        return ElicitationResult(
            subject=self.subject,
            triples=triples,
            has_instance_of=self.has_instance_of,
            parse_status=_PARSE_FOR_STATUS[self.status],
        )


def record_for(result: ElicitationResult, depth: int, batch_id: str, model: str) -> CheckpointRecord:
    return CheckpointRecord(
        subject=result.subject,
        depth=depth,
        status=_STATUS_FOR_PARSE[result.parse_status].value,
        has_instance_of=result.has_instance_of,
        batch_id=batch_id,
        model=model,
        triples=[
            {"predicate": t.predicate_raw, "object": t.object_value, "kind": t.object_kind.value}
            for t in result.triples
        ],
    )


def append_records(path: str | Path, records: list[CheckpointRecord]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(asdict(rec), ensure_ascii=False) + "\n")
        fh.flush()


def load_checkpoint(path: str | Path) -> list[CheckpointRecord]:
    records: list[CheckpointRecord] = []
    try:
        for line_number, doc in read_jsonl(path, tolerate_torn_tail=True):
            if not isinstance(doc, dict) or any(k not in doc for k in _REQUIRED_FIELDS):
                raise CheckpointError(f"{path}: line {line_number}: malformed checkpoint record")
            records.append(CheckpointRecord(**{k: doc[k] for k in _REQUIRED_FIELDS}))
    except JsonLinesError as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from exc
    return records
