"""Clients that turn (image variant, question) into sampled answer texts.

Two implementations share one contract: an HTTP client for a remote
vision-language endpoint (bounded retries, rate limiting, bounded in-flight
requests) and a deterministic mock whose output is a pure function of the
request fields and a seed. The mock also accepts a fixture table keyed by
(record_id, variant) for replaying known answers.
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from groundcheck.errors import (
    ConfigurationError,
    ContentError,
    InvalidArgumentError,
    TransportError,
)
from groundcheck.imaging.variants import Variant


@dataclass(frozen=True)
class GenerationRequest:
    record_id: str
    variant: Variant
    image: bytes
    question: str
    sample_count: int = 3
    model_id: str = "gpt-3.5"
    temperature: float = 0.7

    def __post_init__(self):
        if self.sample_count < 1:
            raise InvalidArgumentError("sample_count must be >= 1")
        if not self.image:
            raise InvalidArgumentError("image payload must be non-empty")
        if not self.question.strip():
            raise InvalidArgumentError("question must be non-empty")
        if self.temperature < 0:
            raise InvalidArgumentError("temperature must be >= 0")


@dataclass(frozen=True)
class VariantResponse:
    record_id: str
    variant: Variant
    samples: tuple[str, ...]
    model_id: str
    latency_ms: float = 0.0
    from_cache: bool = False

    def __post_init__(self):
        if not self.samples or any(not s for s in self.samples):
            raise InvalidArgumentError("samples must be non-empty texts")


class Responder(Protocol):
    def generate(self, req: GenerationRequest) -> VariantResponse:
        ...


class MockResponder:
    """Deterministic responder for offline runs and tests.

    Answers come from a fixture table mapping (record_id, variant) to a list
    of sample texts when present (cycled if shorter than the requested
    count), otherwise from a seeded synthetic generator. Tracks call and
    in-flight counts so tests can observe caching and concurrency behavior.
    """

    def __init__(
        self,
        fixtures: dict[tuple[str, Variant], list[str]] | None = None,
        seed: int = 0,
    ):
        self.fixtures = dict(fixtures or {})
        self.seed = seed
        self.calls = 0
        self.in_flight = 0
        self.max_in_flight = 0
        self._lock = threading.Lock()

    @classmethod
    def from_fixture_file(cls, path: str | Path, seed: int = 0) -> "MockResponder":
        """Load a JSON list of {record_id, variant, samples} entries."""
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
        fixtures = {
            (entry["record_id"], Variant(entry["variant"])): list(entry["samples"])
            for entry in entries
        }
        return cls(fixtures=fixtures, seed=seed)

    def _synthetic_sample(self, req: GenerationRequest, index: int) -> str:
        digest = hashlib.sha256(
            "\x1f".join(
                [
                    str(self.seed),
                    req.record_id,
                    req.variant.value,
                    req.question,
                    req.model_id,
                    f"{req.temperature:.6f}",
                    str(index),
                ]
            ).encode("utf-8")
        ).hexdigest()
        return (
            f"The {req.variant.value} view of {req.record_id} shows detail "
            f"{digest[:8]}. Confidence token {digest[8:12]}."
        )

    def generate(self, req: GenerationRequest) -> VariantResponse:
        with self._lock:
            self.calls += 1
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            key = (req.record_id, req.variant)
            if key in self.fixtures:
                table = self.fixtures[key]
                samples = tuple(table[i % len(table)] for i in range(req.sample_count))
            else:
                samples = tuple(
                    self._synthetic_sample(req, i) for i in range(req.sample_count)
                )
            return VariantResponse(
                record_id=req.record_id,
                variant=req.variant,
                samples=samples,
                model_id=req.model_id,
            )
        finally:
            with self._lock:
                self.in_flight -= 1


class HttpResponder:
    """Remote responder speaking JSON over HTTP POST.

    Body: {model, question, image_base64, n, temperature}; reply:
    {samples: [text, ...]}. Transient failures (transport errors, 429, 5xx)
    are retried with exponential backoff; 401/403 aborts immediately as a
    configuration problem; an empty or refused reply raises a content error
    carrying the raw payload.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        max_attempts: int = 4,
        backoff_base: float = 0.5,
        min_request_interval: float = 0.0,
        max_in_flight: int = 8,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.min_request_interval = min_request_interval
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)
        self._semaphore = threading.BoundedSemaphore(max_in_flight)
        self._rate_lock = threading.Lock()
        self._next_allowed = 0.0

    def _throttle(self) -> None:
        if self.min_request_interval <= 0:
            return
        with self._rate_lock:
            now = time.monotonic()
            wait = self._next_allowed - now
            self._next_allowed = max(now, self._next_allowed) + self.min_request_interval
        if wait > 0:
            time.sleep(wait)

    def generate(self, req: GenerationRequest) -> VariantResponse:
        body = {
            "model": req.model_id,
            "question": req.question,
            "image_base64": base64.b64encode(req.image).decode("ascii"),
            "n": req.sample_count,
            "temperature": req.temperature,
        }
        last_error: Exception | None = None
        started = time.monotonic()
        with self._semaphore:
            for attempt in range(self.max_attempts):
                self._throttle()
                try:
                    reply = self._client.post(self.endpoint, json=body)
                except httpx.HTTPError as exc:
                    last_error = exc
                    time.sleep(self.backoff_base * 2**attempt)
                    continue
                if reply.status_code in (401, 403):
                    raise ConfigurationError(
                        f"responder rejected credentials (HTTP {reply.status_code})"
                    )
                if reply.status_code >= 500 or reply.status_code == 429:
                    last_error = TransportError(f"HTTP {reply.status_code}")
                    time.sleep(self.backoff_base * 2**attempt)
                    continue
                reply.raise_for_status()
                payload = reply.json()
                samples = payload.get("samples")
                if (
                    not isinstance(samples, list)
                    or len(samples) != req.sample_count
                    or any(not isinstance(s, str) or not s.strip() for s in samples)
                ):
                    raise ContentError(
                        "responder returned empty or malformed samples", payload=payload
                    )
                return VariantResponse(
                    record_id=req.record_id,
                    variant=req.variant,
                    samples=tuple(samples),
                    model_id=req.model_id,
                    latency_ms=(time.monotonic() - started) * 1000.0,
                )
        raise TransportError(
            f"responder request failed after {self.max_attempts} attempts: {last_error}"
        )
