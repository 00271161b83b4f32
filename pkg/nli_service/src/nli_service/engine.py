"""Inference engines producing raw (entailment, neutral, contradiction) logits.

Two backends: a cross-encoder loaded through transformers, and a stub that
never touches model weights and answers in constant time per pair. Both are
deterministic for a fixed configuration; both process pairs independently so
splitting a batch can never change any pair's logits.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

Triple = tuple[float, float, float]


class EngineError(RuntimeError):
    """Startup or inference failure, with a human-readable diagnostic."""


def _normalize(text: str) -> str:
    return " ".join(text.casefold().split())


class StubEngine:
    """Table lookup with a seeded hash fallback; no weights, O(1) per pair."""

    def __init__(self, table: dict[tuple[str, str], Triple] | None = None, seed: int = 0):
        self.table = dict(table or {})
        self.seed = seed

    @classmethod
    def from_table_file(cls, path: str | Path, seed: int = 0) -> "StubEngine":
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {
            (entry["premise"], entry["hypothesis"]): tuple(entry["logits"])
            for entry in entries
        }
        return cls(table=table, seed=seed)

    def _fallback(self, premise: str, hypothesis: str) -> Triple:
        digest = hashlib.sha256(
            f"{self.seed}\x1f{premise}\x1f{hypothesis}".encode("utf-8")
        ).digest()
        values = [
            int.from_bytes(digest[i : i + 4], "big") / 2**32 * 8.0 - 4.0
            for i in (0, 4, 8)
        ]
        return (values[0], values[1], values[2])

    def batch_logits(self, pairs: list[tuple[str, str]]) -> tuple[list[Triple], list[bool]]:
        logits: list[Triple] = []
        for premise, hypothesis in pairs:
            if (premise, hypothesis) in self.table:
                logits.append(tuple(self.table[(premise, hypothesis)]))
            elif _normalize(premise) == _normalize(hypothesis):
                logits.append((8.0, 0.0, -8.0))
            else:
                logits.append(self._fallback(premise, hypothesis))
        return logits, [False] * len(pairs)


class CrossEncoderEngine:
    """Pretrained MNLI-style cross-encoder via transformers.

    Pairs run through the model one at a time in inference mode, which keeps
    results independent of batch composition (no cross-pair padding). Inputs
    beyond the encoder's length limit are truncated from the premise end and
    flagged; the hypothesis is the scored unit and always survives intact.
    """

    def __init__(self, model_id: str, max_length: int | None = None):
        try:
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:
            raise EngineError(
                f"model mode needs the 'model' extra (transformers+torch): {exc}"
            ) from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_id)
            self._model = AutoModelForSequenceClassification.from_pretrained(model_id)
        except Exception as exc:
            raise EngineError(f"failed to load checkpoint {model_id!r}: {exc}") from exc

        self._torch = torch
        self._model.eval()
        id2label = {
            index: label.lower() for index, label in self._model.config.id2label.items()
        }
        label2id = {label: index for index, label in id2label.items()}
        missing = {"entailment", "neutral", "contradiction"} - set(label2id)
        if missing:
            raise EngineError(
                f"checkpoint {model_id!r} lacks labels {sorted(missing)}; "
                f"found {sorted(label2id)}"
            )
        self._order = (
            label2id["entailment"],
            label2id["neutral"],
            label2id["contradiction"],
        )
        limit = self._tokenizer.model_max_length
        self.max_length = min(max_length, limit) if max_length else limit
        self._lock = threading.Lock()  # serialize access to the model

    def _one(self, premise: str, hypothesis: str) -> tuple[Triple, bool]:
        full = self._tokenizer(premise, hypothesis, truncation=False)
        truncated = len(full["input_ids"]) > self.max_length
        inputs = self._tokenizer(
            premise,
            hypothesis,
            truncation="only_first",
            max_length=self.max_length,
            return_tensors="pt",
        )
        with self._torch.inference_mode():
            raw = self._model(**inputs).logits[0]
        e, n, c = (float(raw[i]) for i in self._order)
        return (e, n, c), truncated

    def batch_logits(self, pairs: list[tuple[str, str]]) -> tuple[list[Triple], list[bool]]:
        logits: list[Triple] = []
        flags: list[bool] = []
        with self._lock:
            for premise, hypothesis in pairs:
                triple, truncated = self._one(premise, hypothesis)
                logits.append(triple)
                flags.append(truncated)
        return logits, flags


def build_engine(config) -> "StubEngine | CrossEncoderEngine":
    if config.mode == "stub":
        if config.stub_table:
            return StubEngine.from_table_file(config.stub_table, seed=config.stub_seed)
        return StubEngine(seed=config.stub_seed)
    if config.mode == "model":
        return CrossEncoderEngine(config.model_id, max_length=config.max_length)
    raise EngineError(f"unknown mode {config.mode!r}; expected 'stub' or 'model'")
