"""End-to-end orchestration: corpus -> variants -> generation -> scoring ->
ensembling -> artifacts, with a content-addressed cache making every stage
resumable.

Records are processed concurrently by a bounded worker pool; within one
record the variants run in fixed order (org, then nr, then ee). A record
that fails at any stage is quarantined with its reason and excluded from the
aggregates, never aborting the run. Generation results are cached one sample
per entry keyed by (record, variant, question hash, variant image hash,
model, temperature, sample index), so an interrupted run resumes without
re-calling the responder.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from groundcheck.cache import FileCache, cache_key, content_hash
from groundcheck.config import RunConfig
from groundcheck.corpus import CorpusRecord, fetch_image_bytes, load_manifest
from groundcheck.ensemble import (
    EnsembleDecision,
    Policy,
    VariantScoreTriple,
    category_route,
    oracle_min,
)
from groundcheck.errors import ConfigurationError, GroundcheckError
from groundcheck.imaging.buffer import decode_image, encode_png
from groundcheck.imaging.variants import FilterSpec, NrMode, Variant, apply_variant
from groundcheck.nli_client import HttpNliClient, StubNliClient
from groundcheck.report import ScoredRun, emit
from groundcheck.responder import GenerationRequest, MockResponder, Responder, VariantResponse
from groundcheck.scoring import PremiseMode, score_response
from groundcheck.taxonomy import QuestionCategory

logger = logging.getLogger(__name__)

_VARIANT_ORDER = (Variant.ORG, Variant.NR, Variant.EE)
_STAGES = ("variants", "generate", "score")


@dataclass
class RunResult:
    out_dir: Path
    exit_code: int
    records_total: int
    records_scored: int
    records_quarantined: int
    artifacts: list[Path]


def variant_cache_fields(config: RunConfig, variant: Variant) -> dict:
    """Stage-relevant config for the variant cache key; ORG ignores it all."""
    if variant is Variant.ORG:
        return {}
    fields: dict = {"kernel_size": config.kernel_size, "border": "replicate"}
    blend = {
        "alpha": config.blend.alpha,
        "beta": config.blend.beta,
        "gamma": config.blend.gamma,
    }
    if variant is Variant.NR:
        fields["nr_mode"] = config.nr_mode.value
        if config.nr_mode is NrMode.BLENDED:
            fields["blend"] = blend
    else:  # EE: kernel size is irrelevant, the blend weights are not
        fields.pop("kernel_size")
        fields["blend"] = blend
    return fields


def variant_key(config: RunConfig, image_hash: str, variant: Variant) -> str:
    return cache_key(
        "variant",
        image=image_hash,
        variant=variant.value,
        **variant_cache_fields(config, variant),
    )


def _responder_identity(config: RunConfig) -> dict:
    if config.responder != "mock":
        return {"responder": config.responder}
    identity: dict = {"responder": "mock", "seed": config.seed}
    if config.responder_fixture is not None:
        identity["fixture"] = content_hash(config.responder_fixture.read_bytes())
    return identity


def sample_key(
    config: RunConfig,
    record: CorpusRecord,
    variant: Variant,
    variant_png_hash: str,
    sample_index: int,
) -> str:
    return cache_key(
        "generate",
        record_id=record.id,
        variant=variant.value,
        question=content_hash(record.question.encode("utf-8")),
        image=variant_png_hash,
        model_id=config.model_id,
        temperature=config.temperature,
        sample_index=sample_index,
        **_responder_identity(config),
    )


def _nli_identity(config: RunConfig) -> dict:
    if config.nli != "stub":
        return {"nli": config.nli, "nli_model_id": config.nli_model_id}
    identity: dict = {"nli": "stub", "seed": config.seed}
    if config.nli_table is not None:
        identity["table"] = content_hash(config.nli_table.read_bytes())
    return identity


def score_key(
    config: RunConfig,
    record: CorpusRecord,
    variant: Variant,
    answer: str,
    premises: list[str],
) -> str:
    return cache_key(
        "score",
        record_id=record.id,
        variant=variant.value,
        answer=content_hash(answer.encode("utf-8")),
        premises=content_hash("\x1f".join(premises).encode("utf-8")),
        premise_mode=config.premise_mode.value,
        **_nli_identity(config),
    )


def build_responder(config: RunConfig) -> Responder:
    if config.responder == "mock":
        if config.responder_fixture is not None:
            return MockResponder.from_fixture_file(
                config.responder_fixture, seed=config.seed
            )
        return MockResponder(seed=config.seed)
    from groundcheck.responder import HttpResponder

    return HttpResponder(
        endpoint=config.responder,
        api_key=config.responder_api_key,
        max_in_flight=config.concurrency,
    )


def build_nli_client(config: RunConfig):
    if config.nli == "stub":
        if config.nli_table is not None:
            return StubNliClient.from_table_file(config.nli_table, seed=config.seed)
        return StubNliClient(seed=config.seed)
    return HttpNliClient(endpoint=config.nli, model_id=config.nli_model_id)


class _RecordWorker:
    """Processes one record through the staged, cached pipeline."""

    def __init__(self, config: RunConfig, cache: FileCache, responder, nli):
        self.config = config
        self.cache = cache
        self.responder = responder
        self.nli = nli
        self.image_cache_dir = config.cache_dir / "images"

    def _variant_png(self, record, src_hash: str, src_buf, variant: Variant) -> bytes:
        key = variant_key(self.config, src_hash, variant)
        cached = self.cache.get_bytes(key, suffix=".png")
        if cached is not None:
            return cached
        spec = FilterSpec(
            variant=variant,
            kernel_size=self.config.kernel_size,
            nr_mode=self.config.nr_mode,
            blend=self.config.blend,
        )
        png = encode_png(apply_variant(src_buf, spec))
        self.cache.put_bytes(key, png, suffix=".png")
        return png

    def _generate(self, record, variant: Variant, png: bytes) -> VariantResponse:
        png_hash = content_hash(png)
        keys = [
            sample_key(self.config, record, variant, png_hash, i)
            for i in range(self.config.sample_count)
        ]
        cached = [self.cache.get_json(k) for k in keys]
        if all(entry is not None for entry in cached):
            return VariantResponse(
                record_id=record.id,
                variant=variant,
                samples=tuple(entry["text"] for entry in cached),
                model_id=self.config.model_id,
                from_cache=True,
            )
        response = self.responder.generate(
            GenerationRequest(
                record_id=record.id,
                variant=variant,
                image=png,
                question=record.question,
                sample_count=self.config.sample_count,
                model_id=self.config.model_id,
                temperature=self.config.temperature,
            )
        )
        for key, text in zip(keys, response.samples):
            self.cache.put_json(key, {"text": text})
        return response

    def _score(self, record, variant: Variant, response: VariantResponse) -> float:
        answer = response.samples[0]
        if self.config.premise_mode is PremiseMode.REFERENCE:
            premises = [record.reference_answer]
        else:
            premises = list(response.samples)
        key = score_key(self.config, record, variant, answer, premises)
        cached = self.cache.get_json(key)
        if cached is not None:
            return cached["response_nli"]
        score = score_response(
            answer,
            premises,
            premise_mode=self.config.premise_mode,
            nli=self.nli,
            record_id=record.id,
            variant=variant,
        )
        self.cache.put_json(
            key,
            {
                "response_nli": score.response_nli,
                "sentences": [
                    {
                        "sentence": s.sentence,
                        "per_premise": list(s.per_premise),
                        "s_nli": s.s_nli,
                    }
                    for s in score.sentence_scores
                ],
            },
        )
        return score.response_nli

    def process(
        self, record: CorpusRecord, base_dir: Path | None, stop_after: str | None
    ) -> VariantScoreTriple | None:
        """Returns the record's score triple, or None when stopped early."""
        if record.image_missing:
            raise GroundcheckError(f"image file not found: {record.image}")
        raw = fetch_image_bytes(record, base_dir, self.image_cache_dir)
        src = decode_image(raw)
        src_hash = content_hash(raw)

        pngs = {v: self._variant_png(record, src_hash, src, v) for v in _VARIANT_ORDER}
        if stop_after == "variants":
            return None

        responses = {v: self._generate(record, v, pngs[v]) for v in _VARIANT_ORDER}
        if stop_after == "generate":
            return None

        scores = {v: self._score(record, v, responses[v]) for v in _VARIANT_ORDER}
        return VariantScoreTriple(
            record_id=record.id,
            nli_org=scores[Variant.ORG],
            nli_ee=scores[Variant.EE],
            nli_nr=scores[Variant.NR],
        )


def _decide(
    config: RunConfig,
    triples: list[VariantScoreTriple],
    categories: dict[str, frozenset[QuestionCategory]],
):
    decisions: dict[Policy, tuple[EnsembleDecision, ...]] = {}
    routing_tables = {}
    for policy in config.policies:
        if policy == "oracle":
            decisions[Policy.ORACLE_MIN] = tuple(oracle_min(t) for t in triples)
        else:
            table, routed = category_route(triples, categories)
            decisions[Policy.CATEGORY_ROUTE] = tuple(routed)
            routing_tables[Policy.CATEGORY_ROUTE] = table
    return decisions, routing_tables


def _write_state(
    config: RunConfig,
    triples: list[VariantScoreTriple],
    categories: dict[str, frozenset[QuestionCategory]],
    quarantined: list[dict],
) -> None:
    state = {
        "config": config.to_dict(),
        "triples": [
            {
                "record_id": t.record_id,
                "nli_org": t.nli_org,
                "nli_ee": t.nli_ee,
                "nli_nr": t.nli_nr,
            }
            for t in triples
        ],
        "categories": {
            record_id: sorted(c.value for c in cats)
            for record_id, cats in categories.items()
        },
        "quarantined": quarantined,
    }
    config.out_dir.mkdir(parents=True, exist_ok=True)
    (config.out_dir / "state.json").write_text(
        json.dumps(state, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def run(config: RunConfig, stop_after: str | None = None) -> RunResult:
    """Execute a full (or staged) run. Config errors are fatal before any
    work starts; per-record errors quarantine the record and continue."""
    config.validate()
    if stop_after is not None and stop_after not in _STAGES:
        raise ConfigurationError(
            f"stop_after must be one of {_STAGES}, got {stop_after!r}"
        )

    manifest = load_manifest(config.manifest, limit=config.limit, strict=config.strict)
    cache = FileCache(config.cache_dir)
    responder = build_responder(config)
    nli = build_nli_client(config)
    worker = _RecordWorker(config, cache, responder, nli)

    results: dict[str, VariantScoreTriple | None] = {}
    quarantined: list[dict] = []

    def _process(record: CorpusRecord):
        try:
            return record.id, worker.process(record, manifest.base_dir, stop_after), None
        except Exception as exc:  # per-record isolation, never aborts the run
            logger.warning("record %s quarantined: %s", record.id, exc)
            return record.id, None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
        for record_id, triple, error in pool.map(_process, manifest.records):
            if error is not None:
                quarantined.append({"record_id": record_id, "reason": error})
            else:
                results[record_id] = triple

    if stop_after in ("variants", "generate"):
        return RunResult(
            out_dir=config.out_dir,
            exit_code=0 if not quarantined else 2,
            records_total=len(manifest),
            records_scored=0,
            records_quarantined=len(quarantined),
            artifacts=[],
        )

    # Preserve manifest order in aggregates.
    triples = [results[r.id] for r in manifest.records if results.get(r.id) is not None]
    categories = {
        r.id: r.categories for r in manifest.records if results.get(r.id) is not None
    }

    artifacts: list[Path] = []
    if triples:
        decisions, routing_tables = _decide(config, triples, categories)
        scored = ScoredRun(
            triples=tuple(triples),
            categories=categories,
            decisions=decisions,
            routing_tables=routing_tables,
            config=config.to_dict(),
            quarantined=tuple(quarantined),
        )
        artifacts = emit(scored, config.out_dir)
    _write_state(config, triples, categories, quarantined)

    return RunResult(
        out_dir=config.out_dir,
        exit_code=0 if not quarantined else 2,
        records_total=len(manifest),
        records_scored=len(triples),
        records_quarantined=len(quarantined),
        artifacts=artifacts,
    )


def report_from_state(run_dir: str | Path) -> list[Path]:
    """Re-emit artifacts for a completed run from its persisted state."""
    from groundcheck.errors import EmptyRunError

    run_dir = Path(run_dir)
    state_path = run_dir / "state.json"
    if not state_path.is_file():
        raise ConfigurationError(f"no run state found at {state_path}")
    state = json.loads(state_path.read_text(encoding="utf-8"))
    if not state["triples"]:
        raise EmptyRunError("run state has no scored records to report on")
    config = RunConfig.from_dict(state["config"])
    triples = [
        VariantScoreTriple(
            record_id=t["record_id"],
            nli_org=t["nli_org"],
            nli_ee=t["nli_ee"],
            nli_nr=t["nli_nr"],
        )
        for t in state["triples"]
    ]
    categories = {
        record_id: frozenset(QuestionCategory(v) for v in values)
        for record_id, values in state["categories"].items()
    }
    decisions, routing_tables = _decide(config, triples, categories)
    scored = ScoredRun(
        triples=tuple(triples),
        categories=categories,
        decisions=decisions,
        routing_tables=routing_tables,
        config=state["config"],
        quarantined=tuple(state.get("quarantined", ())),
    )
    return emit(scored, run_dir)
