"""Turtle export and import, built for byte-exact round trips.

The exporter emits absolute IRIs only (no prefix directives): one
statement per line, sorted by the decoded (subject, predicate, object)
strings, duplicates collapsed. Labels become IRIs by percent-encoding the
whole label with no safe characters, which is injective, so distinct
labels can never collide as IRIs. The importer accepts exactly this
dialect and reports the line number of anything it cannot parse.
"""

from __future__ import annotations

import re
from urllib.parse import quote, unquote

from kbforge.errors import TtlParseError
from kbforge.kbstore.store import KnowledgeBase
from kbforge.model import ElicitationResult, ObjectKind, ParseStatus, Provenance, Triple, is_instance_of

DEFAULT_NAMESPACE = "http://example.org/gptkb/"

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}

_STATEMENT_RE = re.compile(r'^<([^<>\s]+)> <([^<>\s]+)> (?:<([^<>\s]+)>|"((?:[^"\\]|\\.)*)") \.$')


def _escape_literal(value: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in value)


def _unescape_literal(value: str, line_number: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\":
            if i + 1 >= len(value):
                raise TtlParseError("dangling escape in literal", line_number)
            nxt = value[i + 1]
            if nxt not in _UNESCAPES:
                raise TtlParseError(f"unknown escape \\{nxt} in literal", line_number)
            out.append(_UNESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _iri(namespace: str, label: str) -> str:
    return namespace + quote(label, safe="")


def _label_from_iri(iri: str, line_number: int) -> str:
    # encoded labels contain no slash, so the last path segment is the label
    head, sep, tail = iri.rpartition("/")
    if not sep or not tail:
        raise TtlParseError(f"cannot extract a label from IRI <{iri}>", line_number)
    return unquote(tail)


def export_ttl(kb: KnowledgeBase, namespace: str = DEFAULT_NAMESPACE) -> str:
    """Serialize every triple; canonical names are used where present."""
    rows: set[tuple[str, str, str, bool]] = set()
    for record in kb.records():
        for t in record.triples:
            rows.add((t.subject, t.predicate, t.object, t.object_kind is ObjectKind.NAMED_ENTITY))
    lines = []
    for subject, predicate, obj, is_entity in sorted(rows):
        rendered = f"<{_iri(namespace, obj)}>" if is_entity else f'"{_escape_literal(obj)}"'
        lines.append(f"<{_iri(namespace, subject)}> <{_iri(namespace, predicate)}> {rendered} .")
    return "\n".join(lines) + ("\n" if lines else "")


def import_ttl(document: str) -> KnowledgeBase:
    """Rebuild a store from an exported document.

    Imported triples carry import provenance (layer 1); object kinds are
    named_entity for IRI objects and literal otherwise, which is exactly
    the distinction the exporter encoded.
    """
    kb = KnowledgeBase()
    by_subject: dict[str, list[Triple]] = {}
    order: list[str] = []
    for line_number, line in enumerate(document.split("\n"), start=1):
        if not line.strip():
            continue
        m = _STATEMENT_RE.match(line)
        if m is None:
            raise TtlParseError(f"malformed statement: {line[:80]!r}", line_number)
        subject_iri, predicate_iri, object_iri, literal = m.group(1), m.group(2), m.group(3), m.group(4)
        subject = _label_from_iri(subject_iri, line_number)
        predicate = _label_from_iri(predicate_iri, line_number)
        if object_iri is not None:
            obj = _label_from_iri(object_iri, line_number)
            kind = ObjectKind.NAMED_ENTITY
        else:
            obj = _unescape_literal(literal, line_number)
            kind = ObjectKind.LITERAL
        prov = Provenance(layer=1, batch_id="import", model_id="import")
        triple = Triple(subject, predicate, obj, kind, prov)
        if subject not in by_subject:
            by_subject[subject] = []
            order.append(subject)
        by_subject[subject].append(triple)

    for subject in order:
        triples = by_subject[subject]
        has_instance = any(is_instance_of(t.predicate_raw) for t in triples)
        result = ElicitationResult(subject, triples, has_instance, ParseStatus.OK)
        kb.insert_triples(result, depth=1)
    return kb
