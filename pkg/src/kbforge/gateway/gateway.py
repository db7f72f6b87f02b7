"""The gateway: structured completions, batching, retries, budget.

One gateway instance wraps one provider. Single completions run on the
caller's thread; batches run on a worker pool whose size is the concurrent
batch limit, so batches past the limit queue locally until a slot frees.
Batch status moves queued -> running -> complete | failed and never back.
"""

from __future__ import annotations

import itertools
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Any, Sequence

from concurrent.futures import ThreadPoolExecutor

from kbforge.errors import BatchSizeError, BudgetExceededError, ProviderError, TransportError, UnknownHandleError
from kbforge.gateway.ledger import CostLedger
from kbforge.gateway.providers import ChatProvider
from kbforge.gateway.templates import (
    PromptRequest,
    StructuredResponse,
    payload_is_empty,
    render,
    schema_registered,
    validate_payload,
)
from kbforge.model import ParseStatus

log = logging.getLogger(__name__)


class BatchState(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    COMPLETE = "complete"
    FAILED = "failed"


_TERMINAL = {BatchState.COMPLETE, BatchState.FAILED}


@dataclass(frozen=True)
class BatchHandle:
    handle_id: str


@dataclass
class BatchStatus:
    handle_id: str
    status: BatchState
    results: list[StructuredResponse] | None = None
    error_report: dict | None = None


@dataclass
class GatewayConfig:
    batch_size_limit: int = 10_000
    concurrent_batch_limit: int = 100
    retry_attempts: int = 3
    retry_base_delay: float = 0.05
    price_per_input_token: float | str | Decimal = 0
    price_per_output_token: float | str | Decimal = 0
    budget_cap: float | str | Decimal | None = None


@dataclass
class _Batch:
    requests: list[PromptRequest]
    status: BatchState = BatchState.QUEUED
    results: list[StructuredResponse] = field(default_factory=list)
    error_report: dict | None = None
    done: threading.Event = field(default_factory=threading.Event)


class LlmGateway:
    def __init__(
        self,
        provider: ChatProvider,
        config: GatewayConfig | None = None,
        ledger: CostLedger | None = None,
    ) -> None:
        self.provider = provider
        self.config = config or GatewayConfig()
        self.ledger = ledger or CostLedger(
            price_per_input_token=self.config.price_per_input_token,
            price_per_output_token=self.config.price_per_output_token,
            budget_cap=self.config.budget_cap,
        )
        self._batches: dict[str, _Batch] = {}
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        self._pool = ThreadPoolExecutor(
            max_workers=self.config.concurrent_batch_limit, thread_name_prefix="kbforge-batch"
        )

    # -- single completions ------------------------------------------------

    def complete_structured(self, req: PromptRequest) -> StructuredResponse:
        if not schema_registered(req.schema_id):
            raise ProviderError(f"schema {req.schema_id!r} not registered")
        if self.ledger.exceeded:
            raise BudgetExceededError(
                f"budget cap {self.ledger.budget_cap} exceeded at {self.ledger.monetary_cost}; request not sent"
            )
        system, user = render(req.template_id, req.variables)
        reply = self._generate_with_retry(req, system, user)
        self.ledger.count_prompt()
        self.ledger.charge(reply.tokens_in, reply.tokens_out)

        payload: Any = reply.payload
        if payload is None and reply.text is not None:
            try:
                payload = json.loads(reply.text)
            except json.JSONDecodeError:
                return self._response(req, None, ParseStatus.PARSE_FAILED, reply)
        if payload is None:
            return self._response(req, None, ParseStatus.EMPTY, reply)
        if not validate_payload(req.schema_id, payload):
            return self._response(req, None, ParseStatus.PARSE_FAILED, reply)
        if payload_is_empty(req.schema_id, payload):
            return self._response(req, payload, ParseStatus.EMPTY, reply)
        return self._response(req, payload, ParseStatus.OK, reply)

    def _response(self, req: PromptRequest, payload: Any, status: ParseStatus, reply) -> StructuredResponse:
        return StructuredResponse(
            request_id=req.request_id,
            payload=payload,
            parse_status=status,
            model_id=reply.model_id,
            tokens_in=reply.tokens_in,
            tokens_out=reply.tokens_out,
        )

    def _generate_with_retry(self, req: PromptRequest, system: str, user: str):
        attempts = max(1, self.config.retry_attempts)
        for attempt in range(attempts):
            try:
                return self.provider.generate(req, system, user)
            except TransportError as exc:
                if attempt + 1 >= attempts:
                    raise ProviderError(
                        f"request {req.request_id}: transport failed after {attempts} attempts: {exc}"
                    ) from exc
                delay = self.config.retry_base_delay * (2**attempt)
                log.warning("transport error on %s (attempt %d/%d), retrying in %.2fs", req.request_id, attempt + 1, attempts, delay)
                if delay > 0:
                    time.sleep(delay)
        raise AssertionError("unreachable")

    # -- batches -----------------------------------------------------------

    def submit_batch(self, reqs: Sequence[PromptRequest]) -> BatchHandle:
        if not reqs:
            raise BatchSizeError("batch is empty")
        if len(reqs) > self.config.batch_size_limit:
            raise BatchSizeError(f"batch of {len(reqs)} exceeds limit {self.config.batch_size_limit}")
        ids = [r.request_id for r in reqs]
        if len(set(ids)) != len(ids):
            raise BatchSizeError("duplicate request_id within batch")
        for r in reqs:
            if not schema_registered(r.schema_id):
                raise ProviderError(f"schema {r.schema_id!r} not registered")

        handle = BatchHandle(handle_id=f"b{next(self._ids):04d}")
        batch = _Batch(requests=list(reqs))
        with self._lock:
            self._batches[handle.handle_id] = batch
        self._pool.submit(self._run_batch, batch)
        return handle

    def _run_batch(self, batch: _Batch) -> None:
        with self._lock:
            batch.status = BatchState.RUNNING
        completed: list[StructuredResponse] = []
        for idx, req in enumerate(batch.requests):
            try:
                completed.append(self.complete_structured(req))
            except (BudgetExceededError, ProviderError) as exc:
                unprocessed = [r.request_id for r in batch.requests[idx:]]
                self._finish(batch, BatchState.FAILED, completed, {
                    "reason": str(exc),
                    "kind": "budget" if isinstance(exc, BudgetExceededError) else "provider",
                    "completed": [r.request_id for r in completed],
                    "completed_responses": completed,
                    "unprocessed": unprocessed,
                })
                return
        self._finish(batch, BatchState.COMPLETE, completed, None)

    def _finish(self, batch: _Batch, status: BatchState, results: list[StructuredResponse], report: dict | None) -> None:
        with self._lock:
            batch.status = status
            batch.results = results
            batch.error_report = report
        batch.done.set()

    def poll_batch(self, handle: BatchHandle) -> BatchStatus:
        with self._lock:
            batch = self._batches.get(handle.handle_id)
            if batch is None:
                raise UnknownHandleError(f"unknown batch handle {handle.handle_id!r}")
            return BatchStatus(
                handle_id=handle.handle_id,
                status=batch.status,
                results=list(batch.results) if batch.status is BatchState.COMPLETE else None,
                error_report=dict(batch.error_report) if batch.error_report else None,
            )

    def wait_batch(self, handle: BatchHandle, timeout: float | None = None) -> BatchStatus:
        with self._lock:
            batch = self._batches.get(handle.handle_id)
        if batch is None:
            raise UnknownHandleError(f"unknown batch handle {handle.handle_id!r}")
        batch.done.wait(timeout)
        return self.poll_batch(handle)

    # -- ledger ------------------------------------------------------------

    def charge(self, tokens_in: int, tokens_out: int) -> bool:
        """Record usage directly; returns True when the cap is now exceeded."""
        if tokens_in < 0 or tokens_out < 0:
            raise ValueError("usage must be non-negative")
        self.ledger.charge(tokens_in, tokens_out)
        return self.ledger.exceeded

    def close(self) -> None:
        self._pool.shutdown(wait=True)

    def __enter__(self) -> "LlmGateway":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
