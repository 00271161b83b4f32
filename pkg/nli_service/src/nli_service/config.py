"""Environment-driven service settings."""

from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_MODEL = "cross-encoder/nli-deberta-v3-base"


@dataclass(frozen=True)
class ServiceConfig:
    mode: str = "stub"  # "stub" or "model"
    model_id: str = DEFAULT_MODEL
    stub_table: str | None = None
    stub_seed: int = 0
    max_batch: int = 64
    max_length: int | None = None  # None: use the tokenizer's limit
    host: str = "127.0.0.1"
    port: int = 8238

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        return cls(
            mode=os.environ.get("NLI_SERVICE_MODE", "stub"),
            model_id=os.environ.get("NLI_SERVICE_MODEL", DEFAULT_MODEL),
            stub_table=os.environ.get("NLI_SERVICE_STUB_TABLE") or None,
            stub_seed=int(os.environ.get("NLI_SERVICE_SEED", "0")),
            max_batch=int(os.environ.get("NLI_SERVICE_MAX_BATCH", "64")),
            max_length=(
                int(os.environ["NLI_SERVICE_MAX_LENGTH"])
                if os.environ.get("NLI_SERVICE_MAX_LENGTH")
                else None
            ),
            host=os.environ.get("NLI_SERVICE_HOST", "127.0.0.1"),
            port=int(os.environ.get("NLI_SERVICE_PORT", "8238")),
        )
