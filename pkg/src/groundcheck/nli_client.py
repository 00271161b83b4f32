"""Clients returning raw entailment/neutral/contradiction logits per text pair.

The wire protocol matches the companion inference service:
POST {endpoint}/v1/nli with {"model_id": str, "pairs": [{"premise", "hypothesis"}...]}
returning {"model_id": str, "logits": [[z_e, z_n, z_c]...], "truncated": [bool...]}.

The stub client is a pure function of (pair texts, lookup table, seed) and
never touches the network, which keeps the whole scoring path deterministic
in tests and offline runs.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from groundcheck.errors import ConfigurationError, InvalidArgumentError, TransportError


@dataclass(frozen=True)
class NliLogits:
    """Raw three-class outputs; neutral is carried but excluded from scoring."""

    z_entail: float
    z_neutral: float
    z_contra: float

    def __post_init__(self):
        for name in ("z_entail", "z_neutral", "z_contra"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")


class NliClient(Protocol):
    def logits(self, pairs: Sequence[tuple[str, str]]) -> list[NliLogits]:
        """Return one logit triple per (premise, hypothesis) pair, in order."""
        ...


def _normalize(text: str) -> str:
    return " ".join(text.casefold().split())


class StubNliClient:
    """Deterministic offline stand-in for the NLI service.

    Resolution order per pair: exact lookup-table hit, identical-text rule
    (entailment-dominant), then a seeded hash-derived fallback. The fallback
    is stable across platforms and processes.
    """

    def __init__(
        self,
        table: dict[tuple[str, str], NliLogits] | None = None,
        seed: int = 0,
    ):
        self.table = dict(table or {})
        self.seed = seed
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_table_file(cls, path: str | Path, seed: int = 0) -> "StubNliClient":
        """Load a JSON list of {premise, hypothesis, logits: [e, n, c]} entries."""
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {
            (entry["premise"], entry["hypothesis"]): NliLogits(*entry["logits"])
            for entry in entries
        }
        return cls(table=table, seed=seed)

    def _fallback(self, premise: str, hypothesis: str) -> NliLogits:
        digest = hashlib.sha256(
            f"{self.seed}\x1f{premise}\x1f{hypothesis}".encode("utf-8")
        ).digest()
        # Map three digest words onto logits in [-4, 4).
        values = [
            int.from_bytes(digest[i : i + 4], "big") / 2**32 * 8.0 - 4.0
            for i in (0, 4, 8)
        ]
        return NliLogits(*values)

    def logits(self, pairs: Sequence[tuple[str, str]]) -> list[NliLogits]:
        out: list[NliLogits] = []
        with self._lock:
            self.calls += len(pairs)
        for premise, hypothesis in pairs:
            if (premise, hypothesis) in self.table:
                out.append(self.table[(premise, hypothesis)])
            elif _normalize(premise) == _normalize(hypothesis):
                out.append(NliLogits(8.0, 0.0, -8.0))
            else:
                out.append(self._fallback(premise, hypothesis))
        return out


class HttpNliClient:
    """Remote client with bounded retries and request chunking."""

    def __init__(
        self,
        endpoint: str,
        model_id: str = "default",
        batch_size: int = 32,
        max_attempts: int = 3,
        backoff_base: float = 0.25,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        if batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        self.endpoint = endpoint.rstrip("/")
        self.model_id = model_id
        self.batch_size = batch_size
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def _post_chunk(self, pairs: Sequence[tuple[str, str]]) -> list[NliLogits]:
        body = {
            "model_id": self.model_id,
            "pairs": [{"premise": p, "hypothesis": h} for p, h in pairs],
        }
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                reply = self._client.post(f"{self.endpoint}/v1/nli", json=body)
            except httpx.HTTPError as exc:
                last_error = exc
                time.sleep(self.backoff_base * 2**attempt)
                continue
            if reply.status_code in (401, 403):
                raise ConfigurationError(
                    f"NLI endpoint rejected credentials (HTTP {reply.status_code})"
                )
            if reply.status_code >= 500 or reply.status_code == 429:
                last_error = TransportError(f"HTTP {reply.status_code}")
                time.sleep(self.backoff_base * 2**attempt)
                continue
            reply.raise_for_status()
            payload = reply.json()
            triples = payload["logits"]
            if len(triples) != len(pairs):
                raise TransportError(
                    f"NLI reply length {len(triples)} != request length {len(pairs)}"
                )
            return [NliLogits(*triple) for triple in triples]
        raise TransportError(
            f"NLI request failed after {self.max_attempts} attempts: {last_error}"
        )

    def logits(self, pairs: Sequence[tuple[str, str]]) -> list[NliLogits]:
        out: list[NliLogits] = []
        for start in range(0, len(pairs), self.batch_size):
            out.extend(self._post_chunk(pairs[start : start + self.batch_size]))
        return out
