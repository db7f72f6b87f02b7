"""Core domain types shared by the crawler, the store, and consolidation."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ObjectKind(str, Enum):
    ENTITY_CANDIDATE = "entity_candidate"
    NAMED_ENTITY = "named_entity"
    LITERAL = "literal"


class ParseStatus(str, Enum):
    OK = "ok"
    PARSE_FAILED = "parse_failed"
    EMPTY = "empty"


class SubjectStatus(str, Enum):
    QUEUED = "queued"
    IN_FLIGHT = "in_flight"
    DONE_NONEMPTY = "done_nonempty"
    DONE_EMPTY = "done_empty"
    PARSE_FAILED = "parse_failed"


@dataclass
class Provenance:
    layer: int
    batch_id: str
    model_id: str


@dataclass
class Triple:
    """One (subject, predicate, object) assertion.

    predicate_raw / object_value hold the elicited strings; the canonical
    fields stay None until consolidation rewrites them. The effective
    predicate/object (canonical when set, raw otherwise) is what exports
    and queries see.
    """

    subject: str
    predicate_raw: str
    object_value: str
    object_kind: ObjectKind
    provenance: Provenance
    predicate_canonical: str | None = None
    object_canonical: str | None = None

    @property
    def predicate(self) -> str:
        return self.predicate_canonical if self.predicate_canonical is not None else self.predicate_raw

    @property
    def object(self) -> str:
        return self.object_canonical if self.object_canonical is not None else self.object_value

    def dedup_key(self) -> tuple[str, str, str]:
        # identity under which exact duplicates collapse within a record
        return (self.subject, self.predicate_raw, self.object_value)

    def as_tuple(self) -> tuple:
        return (
            self.subject,
            self.predicate_raw,
            self.predicate_canonical,
            self.object_value,
            self.object_canonical,
            self.object_kind.value,
            self.provenance.layer,
            self.provenance.batch_id,
            self.provenance.model_id,
        )


@dataclass
class FrontierEntry:
    label: str
    depth: int
    status: SubjectStatus = SubjectStatus.QUEUED


@dataclass
class ElicitationResult:
    subject: str
    triples: list[Triple] = field(default_factory=list)
    has_instance_of: bool = False
    parse_status: ParseStatus = ParseStatus.OK


_INSTANCE_OF_FORMS = {"instanceof", "isa"}


def is_instance_of(predicate: str) -> bool:
    """True when a predicate spells some variant of the instance-of relation.

    Matching is insensitive to case and separators, so instanceOf,
    instance_of, InstanceOf, isA and is_a all count.
    """
    compact = "".join(ch for ch in predicate.lower() if ch.isalnum())
    return compact in _INSTANCE_OF_FORMS
