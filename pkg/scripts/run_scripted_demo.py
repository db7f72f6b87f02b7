#!/usr/bin/env python
"""End-to-end pipeline run against a small scripted world, fully offline.

Seeds a three-layer crawl at Vannevar Bush, consolidates relation and
class names, builds a taxonomy, merges a duplicate entity pair, exports
TTL, and runs the evaluation analyses. Finishes with a stability probe
that elicits one subject a hundred times. Everything is answered from a
generated world file, so the run is deterministic and needs no network.

    python scripts/run_scripted_demo.py [--state-dir DIR] [--fresh]

Re-running without --fresh demonstrates stage reuse: completed stages
whose inputs are unchanged report "up-to-date" and do no work.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from kbforge.evalharness import consistency_probe
from kbforge.gateway import GatewayConfig, LlmGateway, MockProvider
from kbforge.gateway.worlds import consistency_world, demo_world
from kbforge.kbstore import KnowledgeBase, compute_stats
from kbforge.pipeline import load_config, run_all

CONFIG_TEMPLATE = """\
seed: Vannevar Bush
state_dir: .
max_depth: 4
elicit_batch_size: 200
ner_batch_size: 100
random_seed: 0

provider:
  kind: scripted
  world: world.jsonl

clustering:
  alpha: 1.4
  high_threshold: 0.95
  low_threshold: 0.75
  # pinned judgments for name pairs the hashing embedder cannot see;
  # everything else falls back to character trigrams
  similarities:
    - ["isA", "instanceOf", 0.97]

dedup:
  label_similarity_threshold: 0.85
  triple_overlap_threshold: 0.30
  blocking_predicate: birthDate
  target_class: Person
  similarities:
    - ["John F. Kennedy", "John Fitzgerald Kennedy", 0.92]

eval:
  sample_entities: null      # null = every entity
  sample_triples: 40
  overlap_sample: null
  seed: 0
  year_predicate: foundedYear

export:
  namespace: http://example.org/gptkb/
"""


def prepare_state_dir(state_dir: Path, fresh: bool) -> Path:
    if fresh and state_dir.exists():
        shutil.rmtree(state_dir)
    state_dir.mkdir(parents=True, exist_ok=True)
    demo_world().dump(state_dir / "world.jsonl")
    config_path = state_dir / "config.yaml"
    config_path.write_text(CONFIG_TEMPLATE, encoding="utf-8")
    return config_path


def show_stage(result) -> None:
    print(f"\n== {result.stage} [{result.status}] ==")
    print(json.dumps(result.report, indent=2, ensure_ascii=False, default=str))


def show_store(config) -> None:
    kb = KnowledgeBase.load(config.kb_path)
    print("\n== store after consolidation ==")
    stats = compute_stats(kb)
    print(f"entities: {stats.entity_count}, triples: {stats.triple_count}")
    print(
        f"relations: {stats.relation_count_raw} raw -> {stats.relation_count_canonical} canonical; "
        f"classes: {stats.class_count_raw} raw -> {stats.class_count_canonical} canonical"
    )
    merged = kb.query_subject("John Fitzgerald Kennedy")
    if merged is not None:
        print(f"alias lookup 'John Fitzgerald Kennedy' -> {merged.label!r} (aliases: {merged.aliases})")
    seed = kb.query_subject("Vannevar Bush")
    if seed is not None:
        print(f"seed record: {len(seed.triples)} triples, classes {seed.classes}")


def show_consistency() -> None:
    print("\n== elicitation stability probe (separate scripted world) ==")
    world, truth = consistency_world()
    n_runs = len(truth.run_counts) + truth.parse_failures
    with LlmGateway(MockProvider(world), GatewayConfig()) as gateway:
        report = consistency_probe(truth.subject, n_runs, gateway)
    for cluster in report.clusters:
        print(f"cluster: {cluster.size} runs, mean {cluster.mean:.1f} triples (stdev {cluster.stdev:.1f})")
    print(f"parse failures: {report.parse_failures}/{n_runs}")
    print(f"triple-set agreement within largest cluster: {report.largest_cluster_overlap:.3f}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--state-dir", default="demo_state", help="where world, config, and outputs live")
    parser.add_argument("--fresh", action="store_true", help="wipe the state directory first")
    args = parser.parse_args(argv)

    config_path = prepare_state_dir(Path(args.state_dir), args.fresh)
    config = load_config(config_path)

    results = run_all(config)
    for result in results:
        show_stage(result)
    if any(r.status == "halted" for r in results):
        print("\npipeline halted; re-run to resume")
        return 1

    show_store(config)
    show_consistency()
    print(f"\nTTL export: {config.ttl_path}")
    print(f"browse the result: python -m kbforge serve --config {config_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
