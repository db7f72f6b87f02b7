"""Pipeline stages and their orchestration.

Stage order is a chain over the DAG crawl -> {relations, classes} ->
taxonomy -> dedup -> export -> eval, with serve hanging off export.
Each stage records a fingerprint when it completes: a hash of its own
config sections, its external input files, and the fingerprints of the
stages it depends on. Re-running with all of that unchanged is a no-op;
a config or world change invalidates the stage and everything downstream.
Chain-internal artifacts (kb.jsonl, the cluster maps) are deliberately
not digested because later stages rewrite the store in place, which
would spuriously invalidate completed upstream stages. One pipeline
instance per state directory, enforced with a lock file.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

from kbforge.consolidate.clustering import (
    apply_cluster_map,
    class_frequencies,
    cluster_names,
    relation_frequencies,
)
from kbforge.consolidate.dedup import dedup_entities
from kbforge.consolidate.embeddings import (
    EmbeddingProvider,
    HashingEmbedder,
    ScriptedSimilarityEmbedder,
)
from kbforge.consolidate.taxonomy import (
    TaxonomyNode,
    build_taxonomy,
    score_generality,
    taxonomy_from_payload,
)
from kbforge.crawler.crawl import CrawlConfig, Crawler
from kbforge.errors import DependencyError, StateLockedError
from kbforge.evalharness.bias import bias_report
from kbforge.evalharness.consistency import consistency_probe
from kbforge.evalharness.cutoff import year_histogram
from kbforge.evalharness.overlap import overlap_report
from kbforge.evalharness.providers import (
    HttpReferenceKb,
    HttpSearchProvider,
    LlmJudge,
    ScriptedJudge,
    ScriptedReferenceKb,
    ScriptedSearchProvider,
    ScriptedTaxonomyJudge,
)
from kbforge.evalharness.taxonomy_eval import evaluate_taxonomy
from kbforge.evalharness.verification import entity_rate_report, triple_rate_report
from kbforge.gateway import GatewayConfig, LlmGateway
from kbforge.gateway.providers import HttpChatProvider, MockProvider, ScriptedWorld
from kbforge.kbstore.stats import compute_stats
from kbforge.kbstore.store import KnowledgeBase
from kbforge.kbstore.ttl import export_ttl
from kbforge.model import is_instance_of
from kbforge.pipeline.config import (
    ENV_API_KEY,
    ENV_MODEL,
    ENV_PROVIDER_URL,
    ENV_REFKB_URL,
    ENV_SEARCH_KEY,
    ENV_SEARCH_URL,
    PipelineConfig,
)

STAGES = ("crawl", "relations", "classes", "taxonomy", "dedup", "export", "eval", "serve")

_DEPS: dict[str, tuple[str, ...]] = {
    "crawl": (),
    "relations": ("crawl",),
    "classes": ("relations",),
    "taxonomy": ("classes",),
    "dedup": ("taxonomy",),
    "export": ("dedup",),
    "eval": ("export",),
    "serve": ("export",),
}

EVAL_ANALYSES = ("entities", "triples", "taxonomy", "overlap", "cutoff", "bias", "consistency")


@dataclass
class StageResult:
    stage: str
    status: str  # "completed" | "up-to-date" | "halted"
    report: dict
    report_path: Path | None = None


# -- shared plumbing ----------------------------------------------------------


def build_gateway(config: PipelineConfig) -> LlmGateway:
    if config.provider.kind == "scripted":
        provider = MockProvider(ScriptedWorld.load(config.provider.world))
    else:
        endpoint = os.environ.get(ENV_PROVIDER_URL)
        model = os.environ.get(ENV_MODEL)
        if not endpoint or not model:
            raise ValueError(
                f"provider.kind 'http' needs {ENV_PROVIDER_URL} and {ENV_MODEL} in the environment"
            )
        provider = HttpChatProvider(endpoint, os.environ.get(ENV_API_KEY, ""), model)
    gw_config = GatewayConfig(
        price_per_input_token=config.prices.input_per_token,
        price_per_output_token=config.prices.output_per_token,
        budget_cap=config.budget_cap,
    )
    return LlmGateway(provider, gw_config)


def _provider_id(config: PipelineConfig) -> str:
    if config.provider.kind == "scripted":
        return f"scripted:{Path(config.provider.world).name}"
    return f"http:{os.environ.get(ENV_MODEL, 'unset')}"


def _clustering_embedder(config: PipelineConfig) -> EmbeddingProvider:
    return _embedder(config.clustering_similarities)


def _dedup_embedder(config: PipelineConfig) -> EmbeddingProvider:
    return _embedder(config.dedup_similarities)


def _embedder(pairs: list[tuple[str, str, float]]) -> EmbeddingProvider:
    if pairs:
        table = {(a, b): sim for a, b, sim in pairs}
        return ScriptedSimilarityEmbedder(table, fallback=HashingEmbedder())
    return HashingEmbedder()


def _digest(path: Path) -> str:
    if not path.exists():
        return "missing"
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def _require_file(path: Path, stage: str, producer: str) -> None:
    if not path.exists():
        raise DependencyError(f"stage {stage!r} needs {path.name}; run {producer!r} first")


def _load_kb(config: PipelineConfig, stage: str, producer: str = "crawl") -> KnowledgeBase:
    _require_file(config.kb_path, stage, producer)
    return KnowledgeBase.load(config.kb_path)


def _write_map(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


# -- stage implementations ----------------------------------------------------


def _stage_crawl(config: PipelineConfig) -> tuple[dict, str]:
    store = KnowledgeBase()
    crawler = Crawler(
        build_gateway(config),
        store,
        CrawlConfig(
            seed=config.seed,
            max_depth=config.max_depth,
            elicit_batch_size=config.elicit_batch_size,
            ner_batch_size=config.ner_batch_size,
            parse_cap=config.parse_cap,
            checkpoint_path=config.checkpoint_path,
        ),
    )
    report = crawler.run()
    store.save(config.kb_path)
    return report.as_dict(), ("halted" if report.halted else "completed")


def _stage_relations(config: PipelineConfig) -> tuple[dict, str]:
    kb = _load_kb(config, "relations")
    freqs = relation_frequencies(kb)
    if not freqs:
        _write_map(config.relation_map_path, [])
        return {"names": 0, "clusters": 0, "note": "no relations in the KB"}, "completed"
    cmap = cluster_names(freqs, config.clustering, _clustering_embedder(config))
    rewrite = apply_cluster_map(kb, cmap, "relation")
    kb.save(config.kb_path)
    _write_map(config.relation_map_path, cmap.as_rows())
    return {**rewrite.as_dict(), "clusters": cmap.cluster_count()}, "completed"


def _stage_classes(config: PipelineConfig) -> tuple[dict, str]:
    kb = _load_kb(config, "classes")
    freqs = class_frequencies(kb)
    if not freqs:
        _write_map(config.class_map_path, [])
        return {"names": 0, "clusters": 0, "note": "no instance-of triples in the KB"}, "completed"
    cmap = cluster_names(freqs, config.clustering, _clustering_embedder(config))
    rewrite = apply_cluster_map(kb, cmap, "class")
    kb.save(config.kb_path)
    _write_map(config.class_map_path, cmap.as_rows())
    return {**rewrite.as_dict(), "clusters": cmap.cluster_count()}, "completed"


def _stage_taxonomy(config: PipelineConfig) -> tuple[dict, str]:
    kb = _load_kb(config, "taxonomy")
    classes = sorted(
        {t.object for record in kb.records() for t in record.triples if is_instance_of(t.predicate)}
    )
    gateway = build_gateway(config)
    scores = {name: score_generality(name, gateway) for name in classes}
    root = build_taxonomy(scores, gateway)
    with open(config.taxonomy_path, "w", encoding="utf-8") as fh:
        json.dump({"root": root.as_dict(), "scores": scores}, fh, indent=2, ensure_ascii=False)
    names = root.names()
    return {
        "classes": len(classes),
        "nodes": sum(1 for _ in root.iter_nodes()),
        "root": root.class_name,
        "contains_all_classes": all(c in names for c in classes),
    }, "completed"


def load_taxonomy(path: str | Path) -> TaxonomyNode:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    node = taxonomy_from_payload(payload)
    if node is None:
        raise ValueError(f"unreadable taxonomy file: {path}")
    return node


def _stage_dedup(config: PipelineConfig) -> tuple[dict, str]:
    kb = _load_kb(config, "dedup")
    report = dedup_entities(kb, config.dedup, _dedup_embedder(config))
    kb.save(config.kb_path)
    return report.as_dict(), "completed"


def _stage_export(config: PipelineConfig) -> tuple[dict, str]:
    kb = _load_kb(config, "export")
    document = export_ttl(kb, config.export.namespace)
    config.ttl_path.write_text(document, encoding="utf-8")
    stats = compute_stats(kb)
    return {
        "ttl_path": str(config.ttl_path),
        "ttl_bytes": len(document.encode("utf-8")),
        "namespace": config.export.namespace,
        "stats": stats.as_dict(),
    }, "completed"


def _stage_eval(config: PipelineConfig, only: set[str] | None = None) -> tuple[dict, str]:
    kb = _load_kb(config, "eval")
    settings = config.eval
    wanted = set(EVAL_ANALYSES) if only is None else set(only)
    unknown = wanted - set(EVAL_ANALYSES)
    if unknown:
        raise ValueError(f"unknown eval analyses: {sorted(unknown)}; valid: {EVAL_ANALYSES}")

    scripted = config.provider.kind == "scripted"
    world = ScriptedWorld.load(config.provider.world) if scripted else None
    gateway = build_gateway(config)
    # scripted worlds answer the judge directly (unscripted claims default
    # to the benign verdict); live runs route judging through the model
    judge = ScriptedJudge(world) if scripted else LlmJudge(gateway)
    report: dict = {}

    if wanted & {"entities", "triples"}:
        if scripted:
            search = ScriptedSearchProvider(world)
        elif os.environ.get(ENV_SEARCH_URL):
            search = HttpSearchProvider(
                os.environ[ENV_SEARCH_URL], os.environ.get(ENV_SEARCH_KEY)
            )
        else:
            search = None
            note = f"skipped: set {ENV_SEARCH_URL} to enable search-based verification"
            report.update({k: note for k in wanted & {"entities", "triples"}})
        if search is not None:
            if "entities" in wanted:
                report["entities"] = entity_rate_report(
                    kb, search, judge, settings.sample_entities, settings.seed
                ).as_dict()
            if "triples" in wanted:
                report["triples"] = triple_rate_report(
                    kb, search, judge, settings.sample_triples, settings.seed
                ).as_dict()

    if "taxonomy" in wanted:
        if not config.taxonomy_path.exists():
            report["taxonomy"] = "skipped: no taxonomy artifact; run 'taxonomy' first"
        elif not scripted:
            report["taxonomy"] = "skipped: taxonomy judging needs a scripted world"
        else:
            root = load_taxonomy(config.taxonomy_path)
            report["taxonomy"] = evaluate_taxonomy(root, ScriptedTaxonomyJudge(world)).as_dict()

    if "overlap" in wanted:
        if scripted:
            client = ScriptedReferenceKb(world)
        elif os.environ.get(ENV_REFKB_URL):
            client = HttpReferenceKb(os.environ[ENV_REFKB_URL])
        else:
            client = None
            report["overlap"] = f"skipped: set {ENV_REFKB_URL} to enable reference-KB overlap"
        if client is not None:
            labels = sorted(kb.labels())
            size = settings.overlap_sample
            if size is not None and size < len(labels):
                labels = random.Random(settings.seed).sample(labels, size)
            report["overlap"] = {
                "sample_size": len(labels),
                "seed": settings.seed,
                **overlap_report(labels, client).as_dict(),
            }

    if "cutoff" in wanted:
        if settings.year_predicate:
            report["cutoff"] = year_histogram(kb, settings.year_predicate).as_dict()
        else:
            report["cutoff"] = "skipped: set eval.year_predicate to enable cutoff detection"

    if "bias" in wanted:
        report["bias"] = bias_report(
            kb,
            nationality_predicate=settings.nationality_predicate,
            gender_predicate=settings.gender_predicate,
            person_class=settings.person_class,
        ).as_dict()

    if "consistency" in wanted:
        if settings.consistency_subject:
            report["consistency"] = consistency_probe(
                settings.consistency_subject,
                settings.consistency_runs,
                gateway,
                settings.consistency_gap,
            ).as_dict()
        else:
            report["consistency"] = "skipped: set eval.consistency_subject to enable the probe"

    return report, "completed"


def _stage_serve(config: PipelineConfig) -> tuple[dict, str]:
    import uvicorn

    from kbforge.kbstore.server import create_app

    kb = _load_kb(config, "serve")
    app = create_app(kb)
    uvicorn.run(app, host=config.serve.host, port=config.serve.port, log_level="warning")
    return {"host": config.serve.host, "port": config.serve.port}, "completed"


_IMPL = {
    "crawl": _stage_crawl,
    "relations": _stage_relations,
    "classes": _stage_classes,
    "taxonomy": _stage_taxonomy,
    "dedup": _stage_dedup,
    "export": _stage_export,
    "eval": _stage_eval,
    "serve": _stage_serve,
}

_FINGERPRINT_SECTIONS: dict[str, tuple[str, ...]] = {
    "crawl": (
        "seed",
        "max_depth",
        "elicit_batch_size",
        "ner_batch_size",
        "parse_cap",
        "provider",
        "prices",
        "budget_cap",
    ),
    "relations": ("clustering", "clustering_similarities"),
    "classes": ("clustering", "clustering_similarities"),
    "taxonomy": ("provider", "random_seed"),
    "dedup": ("dedup", "dedup_similarities"),
    "export": ("export",),
    "eval": ("eval", "provider"),
    "serve": (),
}


def _external_inputs(name: str, config: PipelineConfig) -> list[Path]:
    world = [Path(config.provider.world)] if config.provider.kind == "scripted" else []
    table: dict[str, list[Path]] = {
        "crawl": world,
        "relations": [],
        "classes": [],
        "taxonomy": world,
        "dedup": [],
        "export": [],
        "eval": world,
        "serve": [],
    }
    return table[name]


def _stage_artifacts(name: str, config: PipelineConfig) -> list[Path]:
    # what the stage leaves on disk; reuse requires these to still exist
    table: dict[str, list[Path]] = {
        "crawl": [config.kb_path, config.checkpoint_path],
        "relations": [config.kb_path, config.relation_map_path],
        "classes": [config.kb_path, config.class_map_path],
        "taxonomy": [config.taxonomy_path],
        "dedup": [config.kb_path],
        "export": [config.ttl_path],
        "eval": [],
        "serve": [],
    }
    return table[name]


def _fingerprint(name: str, config: PipelineConfig) -> str:
    parts = [config.section_hash(*_FINGERPRINT_SECTIONS[name])]
    parts.extend(_digest(p) for p in _external_inputs(name, config))
    parts.extend(_fingerprint(dep, config) for dep in _DEPS[name])
    return hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()[:16]


# -- state file and lock ------------------------------------------------------


def _load_state(config: PipelineConfig) -> dict:
    if not config.state_file.exists():
        return {}
    with open(config.state_file, encoding="utf-8") as fh:
        return json.load(fh).get("stages", {})


def _save_state(config: PipelineConfig, stages: dict) -> None:
    with open(config.state_file, "w", encoding="utf-8") as fh:
        json.dump({"stages": stages}, fh, indent=2)


@contextmanager
def _hold_lock(config: PipelineConfig):
    try:
        fd = os.open(config.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StateLockedError(
            f"state dir already locked ({config.lock_path}); "
            "remove the lock file if no other pipeline instance is running"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(config.lock_path)
        except FileNotFoundError:
            pass


def _check_deps(name: str, state: dict) -> None:
    for dep in _DEPS[name]:
        entry = state.get(dep)
        if entry is None:
            raise DependencyError(f"stage {name!r} requires stage {dep!r}; run {dep!r} first")
        if entry.get("status") == "halted":
            raise DependencyError(
                f"stage {name!r} requires completed stage {dep!r}; the last run halted "
                f"({entry.get('halt_reason', 'unknown')}); re-run {dep!r} to resume"
            )
        if entry.get("status") != "completed":
            raise DependencyError(f"stage {name!r} requires completed stage {dep!r}")


# -- public entry points ------------------------------------------------------


def run_stage(name: str, config: PipelineConfig, only: set[str] | None = None) -> StageResult:
    if name not in STAGES:
        raise ValueError(f"unknown stage {name!r}; valid stages: {', '.join(STAGES)}")
    config.ensure_dirs()
    state = _load_state(config)
    _check_deps(name, state)

    with _hold_lock(config):
        report_path = config.reports_dir / f"{name}.json"
        entry = state.get(name)
        fingerprint = _fingerprint(name, config)
        reusable = (
            name != "serve"
            and only is None
            and entry is not None
            and entry.get("status") == "completed"
            and entry.get("fingerprint") == fingerprint
            and report_path.exists()
            and all(p.exists() for p in _stage_artifacts(name, config))
        )
        if reusable:
            with open(report_path, encoding="utf-8") as fh:
                stored = json.load(fh).get("report", {})
            return StageResult(name, "up-to-date", stored, report_path)

        if name == "eval":
            report, status = _stage_eval(config, only=only)
        else:
            report, status = _IMPL[name](config)

        if name == "serve" or only is not None:
            return StageResult(name, status, report)

        meta = {
            "stage": name,
            "status": status,
            "config_hash": config.config_hash(),
            "random_seed": config.random_seed,
            "provider": _provider_id(config),
            "completed_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump({**meta, "report": report}, fh, indent=2, ensure_ascii=False, default=str)
        state[name] = {
            "status": status,
            "fingerprint": fingerprint,
            "config_hash": meta["config_hash"],
            "provider": meta["provider"],
            "completed_at": meta["completed_at"],
            "report_path": str(report_path),
        }
        if status == "halted":
            state[name]["halt_reason"] = report.get("halted")
        _save_state(config, state)
        return StageResult(name, status, report, report_path)


def run_all(
    config: PipelineConfig,
    stages: tuple[str, ...] = ("crawl", "relations", "classes", "taxonomy", "dedup", "export", "eval"),
) -> list[StageResult]:
    results = []
    for name in stages:
        result = run_stage(name, config)
        results.append(result)
        if result.status == "halted":
            break
    return results
