"""Triple store, statistics, TTL export/import, and the query server."""

from kbforge.kbstore.stats import KbStats, compute_stats
from kbforge.kbstore.store import EntityRecord, KnowledgeBase
from kbforge.kbstore.ttl import export_ttl, import_ttl

__all__ = [
    "EntityRecord",
    "KbStats",
    "KnowledgeBase",
    "compute_stats",
    "export_ttl",
    "import_ttl",
]
