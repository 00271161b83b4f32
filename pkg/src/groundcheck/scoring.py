"""Contradiction scoring of a generated answer against premise texts.

The answer is split into sentences; every (premise, sentence) pair is sent to
an NLI client with the premise first; each pair's contradiction probability
is the two-class softmax over the entailment and contradiction logits (the
neutral class is ignored). Sentence scores average over premises, and the
response score averages over sentences, so everything stays in [0, 1] with
1 meaning "contradicts the premises everywhere".
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Sequence

from groundcheck.errors import EmptyInputError, InvalidArgumentError
from groundcheck.imaging.variants import Variant
from groundcheck.nli_client import NliClient, NliLogits

# Trailing-dot abbreviations that must not end a sentence.
_PROTECTED = frozenset({"e.g.", "i.e.", "etc.", "mr.", "dr."})
_TERMINAL = re.compile(r"[.!?]+(?=\s|$)")


class PremiseMode(str, enum.Enum):
    REFERENCE = "reference"
    SELF_SAMPLES = "self"


@dataclass(frozen=True)
class SentenceScore:
    sentence_index: int
    sentence: str
    per_premise: tuple[float, ...]
    s_nli: float


@dataclass(frozen=True)
class ResponseScore:
    record_id: str
    variant: Variant | None
    sentence_scores: tuple[SentenceScore, ...]
    response_nli: float
    premise_mode: PremiseMode


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation followed by whitespace or end-of-text.

    Fragments are trimmed, empties dropped, and a small abbreviation list
    (e.g., i.e., etc., Mr., Dr.) is protected from splitting.
    """
    if not isinstance(text, str) or not text.strip():
        raise EmptyInputError("text must be non-empty")
    if not any(ch.isalnum() for ch in text):
        raise EmptyInputError("text has no alphanumeric content")

    sentences: list[str] = []
    start = 0
    for match in _TERMINAL.finditer(text):
        end = match.end()
        last_word = text[start:end].split()[-1].lower() if text[start:end].split() else ""
        if last_word in _PROTECTED:
            continue
        fragment = text[start:end].strip()
        if fragment:
            sentences.append(fragment)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def contradiction_probability(logits: NliLogits) -> float:
    """Two-class softmax exp(z_c) / (exp(z_e) + exp(z_c)), neutral ignored.

    Uses max subtraction so extreme logits cannot overflow.
    """
    if not isinstance(logits, NliLogits):
        raise InvalidArgumentError("logits must be an NliLogits instance")
    m = max(logits.z_entail, logits.z_contra)
    e = math.exp(logits.z_entail - m)
    c = math.exp(logits.z_contra - m)
    return c / (e + c)


def score_response(
    answer: str,
    premises: Sequence[str],
    premise_mode: PremiseMode = PremiseMode.REFERENCE,
    nli: NliClient = None,
    record_id: str = "",
    variant: Variant | None = None,
) -> ResponseScore:
    """Score one answer against its premises.

    In REFERENCE mode the premises are the single reference answer; in
    SELF_SAMPLES mode they are the sampled responses. Every premise is paired
    with every answer sentence in one batched client call.
    """
    if nli is None:
        raise InvalidArgumentError("an NLI client is required")
    if not premises:
        raise InvalidArgumentError("premises must be a non-empty list")
    if any(not premise.strip() for premise in premises):
        raise InvalidArgumentError("premises must be non-empty texts")
    sentences = split_sentences(answer)

    pairs = [(premise, sentence) for sentence in sentences for premise in premises]
    all_logits = nli.logits(pairs)

    sentence_scores: list[SentenceScore] = []
    n = len(premises)
    for i, sentence in enumerate(sentences):
        per_premise = tuple(
            contradiction_probability(all_logits[i * n + j]) for j in range(n)
        )
        sentence_scores.append(
            SentenceScore(
                sentence_index=i,
                sentence=sentence,
                per_premise=per_premise,
                s_nli=sum(per_premise) / n,
            )
        )

    response_nli = sum(s.s_nli for s in sentence_scores) / len(sentence_scores)
    return ResponseScore(
        record_id=record_id,
        variant=variant,
        sentence_scores=tuple(sentence_scores),
        response_nli=response_nli,
        premise_mode=premise_mode,
    )
