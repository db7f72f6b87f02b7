from kbforge.evalharness.bias import BiasReport, MappingNameLexicon, bias_report
from kbforge.evalharness.consistency import ClusterSummary, ConsistencyReport, consistency_probe
from kbforge.evalharness.cutoff import CutoffReport, detect_cutoff, year_counts, year_histogram
from kbforge.evalharness.overlap import OverlapReport, overlap_report
from kbforge.evalharness.providers import (
    EntityVerdict,
    JudgeProvider,
    LlmJudge,
    ReferenceKbClient,
    ScriptedJudge,
    ScriptedReferenceKb,
    ScriptedSearchProvider,
    ScriptedTaxonomyJudge,
    SearchProvider,
    TaxonomyJudge,
    TripleVerdict,
)
from kbforge.evalharness.taxonomy_eval import TaxonomyEvalReport, evaluate_taxonomy
from kbforge.evalharness.verification import (
    EntityRateReport,
    TripleRateReport,
    VerificationOutcome,
    entity_rate_report,
    triple_rate_report,
    verify_entity,
    verify_triple,
    weighted_layer_average,
)

__all__ = [
    "BiasReport",
    "ClusterSummary",
    "ConsistencyReport",
    "CutoffReport",
    "EntityRateReport",
    "EntityVerdict",
    "JudgeProvider",
    "LlmJudge",
    "MappingNameLexicon",
    "OverlapReport",
    "ReferenceKbClient",
    "ScriptedJudge",
    "ScriptedReferenceKb",
    "ScriptedSearchProvider",
    "ScriptedTaxonomyJudge",
    "SearchProvider",
    "TaxonomyEvalReport",
    "TaxonomyJudge",
    "TripleRateReport",
    "TripleVerdict",
    "VerificationOutcome",
    "bias_report",
    "consistency_probe",
    "detect_cutoff",
    "entity_rate_report",
    "evaluate_taxonomy",
    "overlap_report",
    "triple_rate_report",
    "verify_entity",
    "verify_triple",
    "weighted_layer_average",
    "year_counts",
    "year_histogram",
]
