"""Pipeline configuration: a YAML file mapped onto dataclasses.

Config files are meant to be committed and shared, so they never hold
secrets: provider endpoints, API keys, and model ids are read from
environment variables at stage runtime (KBFORGE_PROVIDER_URL,
KBFORGE_API_KEY, KBFORGE_MODEL, and the eval-side KBFORGE_SEARCH_URL,
KBFORGE_SEARCH_API_KEY, KBFORGE_REFKB_URL).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from kbforge.consolidate.clustering import ClusteringConfig
from kbforge.consolidate.dedup import DedupConfig

ENV_PROVIDER_URL = "KBFORGE_PROVIDER_URL"
ENV_API_KEY = "KBFORGE_API_KEY"
ENV_MODEL = "KBFORGE_MODEL"
ENV_SEARCH_URL = "KBFORGE_SEARCH_URL"
ENV_SEARCH_KEY = "KBFORGE_SEARCH_API_KEY"
ENV_REFKB_URL = "KBFORGE_REFKB_URL"


@dataclass
class ProviderSettings:
    kind: str = "scripted"  # "scripted" answers from a world file, "http" from env-configured endpoint
    world: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("scripted", "http"):
            raise ValueError(f"provider.kind must be 'scripted' or 'http', got {self.kind!r}")
        if self.kind == "scripted" and not self.world:
            raise ValueError("provider.kind 'scripted' requires provider.world (a JSONL path)")


@dataclass
class PriceSettings:
    input_per_token: float = 0.0
    output_per_token: float = 0.0


@dataclass
class EvalSettings:
    sample_entities: int | None = 100
    sample_triples: int | None = 100
    overlap_sample: int | None = 200
    seed: int = 0
    year_predicate: str | None = None
    nationality_predicate: str = "nationality"
    gender_predicate: str = "gender"
    person_class: str = "Person"
    consistency_subject: str | None = None
    consistency_runs: int = 100
    consistency_gap: float = 5.0


@dataclass
class ExportSettings:
    namespace: str = "http://example.org/gptkb/"


@dataclass
class ServeSettings:
    host: str = "127.0.0.1"
    port: int = 8080


@dataclass
class PipelineConfig:
    seed: str
    state_dir: Path
    max_depth: int = 10
    elicit_batch_size: int = 200
    ner_batch_size: int = 100
    parse_cap: int = 500
    random_seed: int = 0
    budget_cap: float | None = None
    provider: ProviderSettings = field(default_factory=lambda: ProviderSettings("http"))
    prices: PriceSettings = field(default_factory=PriceSettings)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    clustering_similarities: list[tuple[str, str, float]] = field(default_factory=list)
    dedup: DedupConfig = field(default_factory=DedupConfig)
    dedup_similarities: list[tuple[str, str, float]] = field(default_factory=list)
    eval: EvalSettings = field(default_factory=EvalSettings)
    export: ExportSettings = field(default_factory=ExportSettings)
    serve: ServeSettings = field(default_factory=ServeSettings)

    def __post_init__(self) -> None:
        if not self.seed or not self.seed.strip():
            raise ValueError("seed entity label must be non-empty")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.budget_cap is not None and self.budget_cap < 0:
            raise ValueError("budget_cap must be >= 0")
        self.state_dir = Path(self.state_dir)

    # -- state directory layout ------------------------------------------

    @property
    def checkpoint_path(self) -> Path:
        return self.state_dir / "checkpoint.jsonl"

    @property
    def kb_path(self) -> Path:
        return self.state_dir / "kb.jsonl"

    @property
    def relation_map_path(self) -> Path:
        return self.state_dir / "relation_map.jsonl"

    @property
    def class_map_path(self) -> Path:
        return self.state_dir / "class_map.jsonl"

    @property
    def taxonomy_path(self) -> Path:
        return self.state_dir / "taxonomy.json"

    @property
    def ttl_path(self) -> Path:
        return self.state_dir / "export.ttl"

    @property
    def reports_dir(self) -> Path:
        return self.state_dir / "reports"

    @property
    def state_file(self) -> Path:
        return self.state_dir / "pipeline_state.json"

    @property
    def lock_path(self) -> Path:
        return self.state_dir / "lock"

    def ensure_dirs(self) -> None:
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.reports_dir.mkdir(parents=True, exist_ok=True)

    def config_hash(self) -> str:
        blob = json.dumps(_plain(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def section_hash(self, *sections: str) -> str:
        plain = _plain(self)
        subset = {name: plain.get(name) for name in sections}
        blob = json.dumps(subset, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _plain(config: PipelineConfig) -> dict:
    return asdict(config)


def _section(raw: dict, name: str) -> dict:
    section = raw.get(name) or {}
    if not isinstance(section, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    return section


def _pairs(raw: object, where: str) -> list[tuple[str, str, float]]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ValueError(f"{where} must be a list of [name_a, name_b, similarity] rows")
    out = []
    for row in raw:
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise ValueError(f"{where} rows must be [name_a, name_b, similarity], got {row!r}")
        out.append((str(row[0]), str(row[1]), float(row[2])))
    return out


_KNOWN_KEYS = frozenset(
    {
        "seed",
        "state_dir",
        "max_depth",
        "elicit_batch_size",
        "ner_batch_size",
        "parse_cap",
        "random_seed",
        "budget_cap",
        "provider",
        "prices",
        "clustering",
        "dedup",
        "eval",
        "export",
        "serve",
    }
)


def config_from_dict(raw: dict, base_dir: Path | None = None) -> PipelineConfig:
    if not isinstance(raw, dict):
        raise ValueError("config root must be a mapping")
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    base = Path(base_dir) if base_dir is not None else Path.cwd()

    def _resolve(value: str | None) -> str | None:
        if value is None:
            return None
        path = Path(value)
        return str(path if path.is_absolute() else base / path)

    provider_raw = _section(raw, "provider")
    provider = ProviderSettings(
        kind=provider_raw.get("kind", "scripted" if provider_raw.get("world") else "http"),
        world=_resolve(provider_raw.get("world")),
    )
    prices_raw = _section(raw, "prices")
    clustering_raw = _section(raw, "clustering")
    dedup_raw = _section(raw, "dedup")
    eval_raw = _section(raw, "eval")
    export_raw = _section(raw, "export")
    serve_raw = _section(raw, "serve")

    state_dir = raw.get("state_dir")
    if not state_dir:
        raise ValueError("config must set state_dir")

    return PipelineConfig(
        seed=str(raw.get("seed", "")),
        state_dir=Path(_resolve(str(state_dir))),
        max_depth=int(raw.get("max_depth", 10)),
        elicit_batch_size=int(raw.get("elicit_batch_size", 200)),
        ner_batch_size=int(raw.get("ner_batch_size", 100)),
        parse_cap=int(raw.get("parse_cap", 500)),
        random_seed=int(raw.get("random_seed", 0)),
        budget_cap=None if raw.get("budget_cap") is None else float(raw["budget_cap"]),
        provider=provider,
        prices=PriceSettings(
            input_per_token=float(prices_raw.get("input_per_token", 0.0)),
            output_per_token=float(prices_raw.get("output_per_token", 0.0)),
        ),
        clustering=ClusteringConfig(
            alpha=float(clustering_raw.get("alpha", 1.4)),
            high_threshold=float(clustering_raw.get("high_threshold", 0.95)),
            low_threshold=float(clustering_raw.get("low_threshold", 0.75)),
        ),
        clustering_similarities=_pairs(clustering_raw.get("similarities"), "clustering.similarities"),
        dedup=DedupConfig(
            label_similarity_threshold=float(dedup_raw.get("label_similarity_threshold", 0.85)),
            triple_overlap_threshold=float(dedup_raw.get("triple_overlap_threshold", 0.30)),
            blocking_predicate=str(dedup_raw.get("blocking_predicate", "birthDate")),
            target_class=str(dedup_raw.get("target_class", "Person")),
        ),
        dedup_similarities=_pairs(dedup_raw.get("similarities"), "dedup.similarities"),
        eval=EvalSettings(
            sample_entities=eval_raw.get("sample_entities", 100),
            sample_triples=eval_raw.get("sample_triples", 100),
            overlap_sample=eval_raw.get("overlap_sample", 200),
            seed=int(eval_raw.get("seed", 0)),
            year_predicate=eval_raw.get("year_predicate"),
            nationality_predicate=eval_raw.get("nationality_predicate", "nationality"),
            gender_predicate=eval_raw.get("gender_predicate", "gender"),
            person_class=eval_raw.get("person_class", "Person"),
            consistency_subject=eval_raw.get("consistency_subject"),
            consistency_runs=int(eval_raw.get("consistency_runs", 100)),
            consistency_gap=float(eval_raw.get("consistency_gap", 5.0)),
        ),
        export=ExportSettings(namespace=export_raw.get("namespace", "http://example.org/gptkb/")),
        serve=ServeSettings(
            host=serve_raw.get("host", "127.0.0.1"), port=int(serve_raw.get("port", 8080))
        ),
    )


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    return config_from_dict(raw, base_dir=path.parent)
