"""Chat providers: a scripted offline mock and a thin HTTPS client.

Scripted world file format (line-delimited JSON), one record per line:

    {"template": "elicit", "key": "Ada Lovelace", "payload": {...}}
    {"template": "elicit", "key": "Flaky Corp", "sequence": ["TRANSPORT_ERROR", {...}]}
    {"template": "ner", "key": "phrase::London", "payload": {"is_named_entity": true}}
    {"template": "search", "key": "Ada Lovelace", "payload": {"snippets": ["..."]}}

A plain "payload" answers every call with the same document. A "sequence"
answers call n with entry min(n, last); the string "TRANSPORT_ERROR" as an
entry raises a transport fault for that call, letting tests script flaky
providers and retry behaviour. Payloads that do not validate against the
template's schema simply flow through and become parse failures downstream.

Lookup keys by template: elicit uses the subject, ner the newline-joined
phrase block (with per-phrase "phrase::<text>" fallback records assembled
into one reply, defaulting to not-an-entity), taxo_seed the constant
"seed", taxo_score the class name, taxo_superclass and taxo_update
"<class>@<node>", entail_entity the entity label, entail_triple the claim.
Unmatched requests return no payload, which the gateway reports as empty.
The "search" and "refkb" templates are not LLM calls; they feed the
scripted retrieval providers of the evaluation harness from the same file.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Protocol

import requests

from kbforge.errors import ProviderError, TransportError
from kbforge.gateway.templates import PromptRequest, TemplateId

TRANSPORT_ERROR_MARKER = "TRANSPORT_ERROR"

PHRASE_KEY_PREFIX = "phrase::"


@dataclass
class ProviderReply:
    payload: Any = None
    text: str | None = None
    tokens_in: int = 0
    tokens_out: int = 0
    model_id: str = ""


class ChatProvider(Protocol):
    def generate(self, request: PromptRequest, system: str, user: str) -> ProviderReply: ...


def scripted_key(template_id: TemplateId, variables: Mapping[str, str]) -> str:
    """The world-file lookup key for a request."""
    if template_id is TemplateId.ELICIT:
        return variables["subject"]
    if template_id is TemplateId.NER:
        return variables["phrases"]
    if template_id is TemplateId.TAXO_SEED:
        return "seed"
    if template_id is TemplateId.TAXO_SCORE:
        return variables["class_name"]
    if template_id in (TemplateId.TAXO_SUPERCLASS, TemplateId.TAXO_UPDATE):
        return f"{variables['class_name']}@{variables.get('node_name', '')}"
    if template_id is TemplateId.ENTAIL_ENTITY:
        return variables["label"]
    if template_id is TemplateId.ENTAIL_TRIPLE:
        return variables["claim"]
    raise ValueError(f"no key rule for template {template_id!r}")


@dataclass
class _Entry:
    sequence: list[Any]
    calls: int = 0

    def next_value(self) -> Any:
        idx = min(self.calls, len(self.sequence) - 1)
        self.calls += 1
        return self.sequence[idx]


class ScriptedWorld:
    """Canned (template, key) -> payload store driving offline runs."""

    def __init__(self, records: Iterable[Mapping[str, Any]] = ()) -> None:
        self._entries: dict[tuple[str, str], _Entry] = {}
        self._lock = threading.Lock()
        for rec in records:
            self.add(rec)

    def add(self, record: Mapping[str, Any]) -> None:
        template = record["template"]
        key = record["key"]
        if "sequence" in record:
            seq = list(record["sequence"])
            if not seq:
                raise ValueError(f"empty sequence for ({template!r}, {key!r})")
        else:
            seq = [record["payload"]]
        self._entries[(template, key)] = _Entry(sequence=seq)

    @classmethod
    def load(cls, path: str | Path) -> "ScriptedWorld":
        world = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    world.add(json.loads(line))
        return world

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for (template, key), entry in self._entries.items():
                if len(entry.sequence) == 1:
                    rec: dict[str, Any] = {"template": template, "key": key, "payload": entry.sequence[0]}
                else:
                    rec = {"template": template, "key": key, "sequence": entry.sequence}
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    def has(self, template: str, key: str) -> bool:
        return (template, key) in self._entries

    def lookup(self, template: str, key: str) -> Any:
        """Payload for this call, or None when unmatched.

        Raises TransportError when the scripted entry is the fault marker.
        Sequence entries advance a per-key call counter, so repeated calls
        see successive entries.
        """
        with self._lock:
            entry = self._entries.get((template, key))
            if entry is None:
                return None
            value = entry.next_value()
        if value == TRANSPORT_ERROR_MARKER:
            raise TransportError(f"scripted transport fault for ({template!r}, {key!r})")
        return value


def _token_estimate(text: str) -> int:
    return len(text.split())


class MockProvider:
    """Deterministic provider that answers from a ScriptedWorld."""

    def __init__(self, world: ScriptedWorld, model_id: str = "scripted-mock") -> None:
        self.world = world
        self.model_id = model_id

    def generate(self, request: PromptRequest, system: str, user: str) -> ProviderReply:
        key = scripted_key(request.template_id, request.variables)
        if request.template_id is TemplateId.NER and not self.world.has("ner", key):
            payload = self._assemble_ner(request.variables["phrases"])
        else:
            payload = self.world.lookup(request.template_id.value, key)
        out_text = "" if payload is None else json.dumps(payload, ensure_ascii=False)
        return ProviderReply(
            payload=payload,
            tokens_in=_token_estimate(system) + _token_estimate(user),
            tokens_out=_token_estimate(out_text),
            model_id=self.model_id,
        )

    def _assemble_ner(self, phrases: str) -> dict:
        verdicts = []
        for phrase in phrases.split("\n"):
            hit = self.world.lookup("ner", PHRASE_KEY_PREFIX + phrase)
            flag = bool(hit.get("is_named_entity", False)) if isinstance(hit, dict) else False
            verdicts.append({"phrase": phrase, "is_named_entity": flag})
        return {"verdicts": verdicts}


class HttpChatProvider:
    """Chat-completions client for an OpenAI-style endpoint.

    Endpoint, key, and model come from the caller; the pipeline reads them
    from KBFORGE_PROVIDER_URL, KBFORGE_API_KEY, and KBFORGE_MODEL so that
    credentials never live in config files.
    """

    def __init__(self, endpoint: str, api_key: str, model_id: str, timeout: float = 120.0) -> None:
        self.endpoint = endpoint
        self.api_key = api_key
        self.model_id = model_id
        self.timeout = timeout
        self._session = requests.Session()

    def generate(self, request: PromptRequest, system: str, user: str) -> ProviderReply:
        body = {
            "model": self.model_id,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "response_format": {"type": "json_object"},
        }
        try:
            resp = self._session.post(
                self.endpoint,
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"provider request failed: {exc}") from exc
        if resp.status_code >= 500 or resp.status_code == 429:
            raise TransportError(f"provider returned {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderError(f"provider rejected request: {resp.status_code} {resp.text[:200]}")
        try:
            doc = resp.json()
            content = doc["choices"][0]["message"]["content"]
            usage = doc.get("usage", {})
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc
        return ProviderReply(
            text=content,
            tokens_in=int(usage.get("prompt_tokens", 0)),
            tokens_out=int(usage.get("completion_tokens", 0)),
            model_id=self.model_id,
        )


@dataclass
class RecordingProvider:
    """Wraps a provider and keeps every request it saw, for tests."""

    inner: ChatProvider
    seen: list[PromptRequest] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def model_id(self) -> str:
        return getattr(self.inner, "model_id", "unknown")

    def generate(self, request: PromptRequest, system: str, user: str) -> ProviderReply:
        with self._lock:
            self.seen.append(request)
        return self.inner.generate(request, system, user)
