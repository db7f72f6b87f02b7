"""Read-only HTTP facade over a knowledge base.

Lookups that miss return 200 with found=false rather than 404: an absent
entity is a normal answer from a KB, not a routing failure.
"""

from __future__ import annotations

from fastapi import FastAPI

from kbforge.kbstore.stats import compute_stats
from kbforge.kbstore.store import KnowledgeBase


def _triple_payload(t) -> dict:
    return {
        "subject": t.subject,
        "predicate": t.predicate,
        "object": t.object,
        "predicate_raw": t.predicate_raw,
        "object_raw": t.object_value,
        "object_kind": t.object_kind.value,
        "layer": t.provenance.layer,
    }


def create_app(kb: KnowledgeBase) -> FastAPI:
    app = FastAPI(title="kbforge", docs_url=None, redoc_url=None)

    @app.get("/entity/{label:path}")
    def get_entity(label: str) -> dict:
        record = kb.query_subject(label)
        if record is None:
            return {"found": False, "label": label}
        return {
            "found": True,
            "label": record.label,
            "depth": record.depth,
            "aliases": sorted(record.aliases),
            "classes": record.classes,
            "triples": [_triple_payload(t) for t in record.triples],
        }

    @app.get("/class/{name:path}")
    def get_class(name: str) -> dict:
        members = sorted(kb.query_class(name))
        return {"class": name, "count": len(members), "members": members}

    @app.get("/stats")
    def get_stats() -> dict:
        return compute_stats(kb).as_dict()

    return app
