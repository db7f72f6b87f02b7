"""LLM-backed named-entity classification with a crawl-global cache."""

from __future__ import annotations

import itertools
import logging
from typing import Sequence

from kbforge.crawler.labels import screens_as_literal
from kbforge.gateway.gateway import LlmGateway
from kbforge.gateway.templates import PromptRequest, TemplateId

log = logging.getLogger(__name__)


class NerClassifier:
    """Judges whether phrases are named entities, at most once per phrase.

    The literal screen runs first and answers without an LLM call. A call
    whose payload fails to parse defaults every phrase in it to False;
    expanding junk is worse than missing an entity.
    """

    def __init__(self, gateway: LlmGateway, batch_size: int = 100) -> None:
        self.gateway = gateway
        self.batch_size = batch_size
        self.cache: dict[str, bool] = {}
        self._ids = itertools.count(1)

    def seed_cache(self, phrase: str, verdict: bool) -> None:
        self.cache.setdefault(phrase, verdict)

    def classify(self, phrases: Sequence[str]) -> dict[str, bool]:
        """Verdicts for every input phrase, preserving first-seen order in
        the LLM batches so runs are reproducible."""
        verdicts: dict[str, bool] = {}
        pending: list[str] = []
        seen: set[str] = set()
        for phrase in phrases:
            if phrase in verdicts or phrase in seen:
                continue
            if phrase in self.cache:
                verdicts[phrase] = self.cache[phrase]
            elif screens_as_literal(phrase):
                self.cache[phrase] = False
                verdicts[phrase] = False
            else:
                pending.append(phrase)
                seen.add(phrase)

        for start in range(0, len(pending), self.batch_size):
            chunk = pending[start : start + self.batch_size]
            for phrase, flag in self._judge_chunk(chunk).items():
                self.cache[phrase] = flag
                verdicts[phrase] = flag
        return verdicts

    def _judge_chunk(self, chunk: list[str]) -> dict[str, bool]:
        req = PromptRequest(
            request_id=f"ner-{next(self._ids)}",
            template_id=TemplateId.NER,
            variables={"phrases": "\n".join(chunk)},
        )
        resp = self.gateway.complete_structured(req)
        if not resp.ok:
            log.warning("NER call %s returned %s; defaulting %d phrases to literal", req.request_id, resp.parse_status.value, len(chunk))
            return {phrase: False for phrase in chunk}
        answered = {v["phrase"]: bool(v["is_named_entity"]) for v in resp.payload["verdicts"]}
        return {phrase: answered.get(phrase, False) for phrase in chunk}
