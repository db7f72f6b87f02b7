"""Evaluation-side service interfaces and their scripted stand-ins.

Search, entailment judging, taxonomy judging, and reference-KB lookups
each get a small protocol plus a deterministic implementation backed by
a scripted world, so every analysis runs offline and repeatably. The
entailment judge also has an LLM-backed implementation that routes
through the gateway.
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterator, Protocol

from kbforge.errors import ProviderError
from kbforge.gateway import LlmGateway, PromptRequest, TemplateId
from kbforge.gateway.providers import ScriptedWorld


class EntityVerdict(str, Enum):
    VERIFIABLE = "verifiable"
    PLAUSIBLE = "plausible"
    UNVERIFIABLE = "unverifiable"


class TripleVerdict(str, Enum):
    ENTAILED = "entailed"
    PLAUSIBLE = "plausible"
    IMPLAUSIBLE = "implausible"
    FALSE = "false"


class SearchProvider(Protocol):
    def search(self, query: str, k: int = 5) -> list[dict]:  # {title, snippet, url} rows
        ...


class JudgeProvider(Protocol):
    def judge_entity(self, label: str, snippets: list[dict]) -> EntityVerdict:
        ...

    def judge_triple(self, claim: str, snippets: list[dict]) -> TripleVerdict:
        ...


class TaxonomyJudge(Protocol):
    def edge_correct(self, child: str, parent: str) -> bool:
        ...

    def best_parent(self, child: str, candidates: list[str]) -> str:
        ...


class ReferenceKbClient(Protocol):
    def exact_label_lookup(self, label: str) -> bool:
        ...

    def fuzzy_search(self, label: str) -> bool:
        ...


class ScriptedSearchProvider:
    """Search over world records: template "search", key = query."""

    def __init__(self, world: ScriptedWorld) -> None:
        self._world = world

    def search(self, query: str, k: int = 5) -> list[dict]:
        payload = self._world.lookup("search", query)
        if not isinstance(payload, dict):
            return []
        snippets = payload.get("snippets", [])
        return list(snippets[:k])


def _format_snippets(snippets: list[dict]) -> str:
    if not snippets:
        return "(no snippets)"
    lines = []
    for i, snip in enumerate(snippets, start=1):
        title = snip.get("title", "")
        body = snip.get("snippet", "")
        lines.append(f"{i}. {title}: {body}")
    return "\n".join(lines)


_judge_ids: Iterator[int] = itertools.count()


class LlmJudge:
    """Entailment judge that asks the model to grade claim vs snippets."""

    def __init__(self, gateway: LlmGateway) -> None:
        self._gateway = gateway

    def judge_entity(self, label: str, snippets: list[dict]) -> EntityVerdict:
        resp = self._gateway.complete_structured(
            PromptRequest(
                f"je-{next(_judge_ids):06d}",
                TemplateId.ENTAIL_ENTITY,
                {"label": label, "snippets": _format_snippets(snippets)},
            )
        )
        if not resp.ok or not isinstance(resp.payload, dict):
            raise ProviderError(f"entity judge returned no usable verdict for {label!r}")
        return EntityVerdict(resp.payload["verdict"])

    def judge_triple(self, claim: str, snippets: list[dict]) -> TripleVerdict:
        resp = self._gateway.complete_structured(
            PromptRequest(
                f"jt-{next(_judge_ids):06d}",
                TemplateId.ENTAIL_TRIPLE,
                {"claim": claim, "snippets": _format_snippets(snippets)},
            )
        )
        if not resp.ok or not isinstance(resp.payload, dict):
            raise ProviderError(f"triple judge returned no usable verdict for {claim!r}")
        return TripleVerdict(resp.payload["verdict"])


class ScriptedJudge:
    """Judge over world records without a gateway in between.

    Keys match the LLM path's scripted keys (entity label, triple claim),
    so the same world file drives either judge. Unscripted items fall
    back to the weakest supported verdict.
    """

    def __init__(self, world: ScriptedWorld) -> None:
        self._world = world

    def judge_entity(self, label: str, snippets: list[dict]) -> EntityVerdict:
        payload = self._world.lookup("entail_entity", label)
        if isinstance(payload, dict) and "verdict" in payload:
            return EntityVerdict(payload["verdict"])
        return EntityVerdict.UNVERIFIABLE

    def judge_triple(self, claim: str, snippets: list[dict]) -> TripleVerdict:
        payload = self._world.lookup("entail_triple", claim)
        if isinstance(payload, dict) and "verdict" in payload:
            return TripleVerdict(payload["verdict"])
        return TripleVerdict.PLAUSIBLE


class ScriptedTaxonomyJudge:
    """Taxonomy judge over world records.

    Edge records: template "taxo_edge", key "<child>@<parent>", payload
    {"correct": bool}; best-parent records: template "taxo_parent",
    key = child, payload {"choice": name}. Unscripted edges default to
    approval and unscripted choices to the first offered candidate.
    """

    def __init__(self, world: ScriptedWorld) -> None:
        self._world = world

    def edge_correct(self, child: str, parent: str) -> bool:
        payload = self._world.lookup("taxo_edge", f"{child}@{parent}")
        if isinstance(payload, dict) and "correct" in payload:
            return bool(payload["correct"])
        return True

    def best_parent(self, child: str, candidates: list[str]) -> str:
        payload = self._world.lookup("taxo_parent", child)
        if isinstance(payload, dict) and isinstance(payload.get("choice"), str):
            return payload["choice"]
        return candidates[0]


class HttpSearchProvider:
    """Minimal JSON web-search client.

    Expects GET {endpoint}?q=...&k=... answering {"results": [{title,
    snippet, url}, ...]}; the pipeline reads endpoint and key from
    KBFORGE_SEARCH_URL / KBFORGE_SEARCH_API_KEY.
    """

    def __init__(self, endpoint: str, api_key: str | None = None, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def search(self, query: str, k: int = 5) -> list[dict]:
        import requests
        from kbforge.errors import TransportError

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = requests.get(
                self.endpoint, params={"q": query, "k": k}, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"search request failed: {exc}") from exc
        if resp.status_code >= 500 or resp.status_code == 429:
            raise TransportError(f"search endpoint returned {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderError(f"search endpoint returned {resp.status_code}")
        try:
            return list(resp.json().get("results", []))[:k]
        except ValueError as exc:
            raise ProviderError(f"search endpoint returned non-JSON body: {exc}") from exc


class HttpReferenceKb:
    """Minimal reference-KB client over two boolean endpoints.

    GET {base}/exact?label=... and GET {base}/search?label=... must each
    answer {"found": bool}; base URL comes from KBFORGE_REFKB_URL.
    """

    def __init__(self, base_url: str, timeout: float = 30.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _ask(self, path: str, label: str) -> bool:
        import requests
        from kbforge.errors import TransportError

        try:
            resp = requests.get(
                f"{self.base_url}/{path}", params={"label": label}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"reference KB request failed: {exc}") from exc
        if resp.status_code >= 500 or resp.status_code == 429:
            raise TransportError(f"reference KB returned {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderError(f"reference KB returned {resp.status_code}")
        try:
            return bool(resp.json().get("found", False))
        except ValueError as exc:
            raise ProviderError(f"reference KB returned non-JSON body: {exc}") from exc

    def exact_label_lookup(self, label: str) -> bool:
        return self._ask("exact", label)

    def fuzzy_search(self, label: str) -> bool:
        return self._ask("search", label)


class ScriptedReferenceKb:
    """Reference-KB lookups over world records.

    Records: template "refkb", key = label, payload {"match": kind} with
    kind in {"exact", "fuzzy", "none", "error"}. "error" raises, so
    client-failure handling can be exercised; unscripted labels are novel.
    """

    def __init__(self, world: ScriptedWorld) -> None:
        self._world = world

    def _match(self, label: str) -> str:
        payload = self._world.lookup("refkb", label)
        if isinstance(payload, dict):
            kind = payload.get("match", "none")
        else:
            kind = "none"
        if kind == "error":
            raise ProviderError(f"reference KB lookup failed for {label!r}")
        return kind

    def exact_label_lookup(self, label: str) -> bool:
        return self._match(label) == "exact"

    def fuzzy_search(self, label: str) -> bool:
        return self._match(label) in ("exact", "fuzzy")
