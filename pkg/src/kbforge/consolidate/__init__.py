from kbforge.consolidate.clustering import (
    ClusteringConfig,
    ClusterMap,
    RewriteReport,
    adaptive_threshold,
    apply_cluster_map,
    class_frequencies,
    cluster_names,
    relation_frequencies,
)
from kbforge.consolidate.dedup import DedupConfig, MergeReport, dedup_entities
from kbforge.consolidate.embeddings import (
    CachedVectorEmbedder,
    EmbeddingProvider,
    HashingEmbedder,
    ScriptedSimilarityEmbedder,
)
from kbforge.consolidate.taxonomy import (
    TaxonomyNode,
    build_taxonomy,
    insert_class_recursive,
    score_generality,
    taxonomy_from_payload,
    taxonomy_to_json,
)

__all__ = [
    "CachedVectorEmbedder",
    "ClusterMap",
    "ClusteringConfig",
    "DedupConfig",
    "EmbeddingProvider",
    "HashingEmbedder",
    "MergeReport",
    "RewriteReport",
    "ScriptedSimilarityEmbedder",
    "TaxonomyNode",
    "adaptive_threshold",
    "apply_cluster_map",
    "build_taxonomy",
    "class_frequencies",
    "cluster_names",
    "dedup_entities",
    "insert_class_recursive",
    "relation_frequencies",
    "score_generality",
    "taxonomy_from_payload",
    "taxonomy_to_json",
]
