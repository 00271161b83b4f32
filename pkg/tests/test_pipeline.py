import hashlib
import json
import shutil
from pathlib import Path

import pytest

from groundcheck.cache import FileCache, cache_key
from groundcheck.config import RunConfig
from groundcheck.corpus import load_manifest, url_cache_key
from groundcheck.errors import ConfigurationError
from groundcheck.imaging.variants import Variant
from groundcheck.pipeline import (
    build_responder,
    report_from_state,
    run,
    sample_key,
    variant_key,
)


def _config(tmp_path, manifest, **overrides):
    base = dict(
        manifest=manifest,
        out_dir=tmp_path / "out",
        cache_dir=tmp_path / "cache",
        kernel_size=3,
        sample_count=2,
        policy="both",
        concurrency=2,
        seed=7,
    )
    base.update(overrides)
    return RunConfig(**base)


def _hash_dir(path: Path) -> dict[str, str]:
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(path.iterdir())
        if p.is_file()
    }


class TestCache:
    def test_key_is_stable_and_field_sensitive(self):
        a = cache_key("stage", x=1, y="z")
        assert a == cache_key("stage", y="z", x=1)
        assert a != cache_key("stage", x=2, y="z")
        assert a != cache_key("other", x=1, y="z")

    def test_round_trip(self, tmp_path):
        cache = FileCache(tmp_path)
        key = cache_key("t", n=1)
        assert cache.get_json(key) is None
        cache.put_json(key, {"v": [1, 2]})
        assert cache.get_json(key) == {"v": [1, 2]}
        cache.put_bytes(key, b"abc", suffix=".png")
        assert cache.get_bytes(key, suffix=".png") == b"abc"

    def test_writes_are_atomic_no_temp_left_behind(self, tmp_path):
        cache = FileCache(tmp_path)
        key = cache_key("t", n=2)
        cache.put_bytes(key, b"payload", suffix=".bin")
        leftovers = [p for p in tmp_path.rglob(".tmp-*")]
        assert leftovers == []


class TestCacheKeyCompleteness:
    def test_kernel_change_invalidates_nr_ee_but_not_org_or_corpus(self, tiny_corpus, tmp_path):
        config_a = _config(tmp_path, tiny_corpus, kernel_size=3)
        config_b = _config(tmp_path, tiny_corpus, kernel_size=5)
        image_hash = "f" * 64
        assert variant_key(config_a, image_hash, Variant.NR) != variant_key(
            config_b, image_hash, Variant.NR
        )
        assert variant_key(config_a, image_hash, Variant.ORG) == variant_key(
            config_b, image_hash, Variant.ORG
        )
        # EE ignores kernel size but depends on the blend weights.
        assert variant_key(config_a, image_hash, Variant.EE) == variant_key(
            config_b, image_hash, Variant.EE
        )
        # Corpus-level image fetch cache is keyed by URL alone.
        assert url_cache_key("https://x/img.png") == url_cache_key("https://x/img.png")

    def test_downstream_generation_key_tracks_variant_image(self, tiny_corpus, tmp_path):
        config = _config(tmp_path, tiny_corpus)
        manifest = load_manifest(tiny_corpus)
        record = manifest.records[0]
        key_one = sample_key(config, record, Variant.NR, "a" * 64, 0)
        key_two = sample_key(config, record, Variant.NR, "b" * 64, 0)
        assert key_one != key_two  # new variant pixels -> new generation entry

    def test_generation_key_tracks_sample_index_and_seed(self, tiny_corpus, tmp_path):
        config = _config(tmp_path, tiny_corpus)
        manifest = load_manifest(tiny_corpus)
        record = manifest.records[0]
        assert sample_key(config, record, Variant.NR, "a" * 64, 0) != sample_key(
            config, record, Variant.NR, "a" * 64, 1
        )
        reseeded = _config(tmp_path, tiny_corpus, seed=8)
        assert sample_key(config, record, Variant.NR, "a" * 64, 0) != sample_key(
            reseeded, record, Variant.NR, "a" * 64, 0
        )


class TestRun:
    def test_full_run_produces_artifacts(self, tiny_corpus, tmp_path):
        config = _config(tmp_path, tiny_corpus)
        result = run(config)
        assert result.exit_code == 0
        assert result.records_total == 5
        assert result.records_scored == 5
        assert result.records_quarantined == 0
        out = config.out_dir
        for name in (
            "summary.json",
            "case_counts.csv",
            "per_record_scores_oracle_min.csv",
            "per_record_scores_category_route.csv",
            "state.json",
            "quarantine.json",
        ):
            assert (out / name).is_file(), name
        summary = json.loads((out / "summary.json").read_text())
        assert summary["records_scored"] == 5
        assert set(summary["policies"]) == {"oracle_min", "category_route"}
        assert summary["config"]["seed"] == 7

    def test_double_run_hits_cache_and_is_byte_identical(self, tiny_corpus, tmp_path):
        config = _config(tmp_path, tiny_corpus)
        run(config)
        first = _hash_dir(config.out_dir)

        # Second run over the same cache: every stage replays.
        result = run(config)
        assert result.exit_code == 0
        assert _hash_dir(config.out_dir) == first

    def test_second_run_issues_zero_responder_calls(self, tiny_corpus, tmp_path, monkeypatch):
        config = _config(tmp_path, tiny_corpus)
        counters = []

        import groundcheck.pipeline as pipeline_module

        original = pipeline_module.build_responder

        def counting_build(cfg):
            responder = original(cfg)
            counters.append(responder)
            return responder

        monkeypatch.setattr(pipeline_module, "build_responder", counting_build)
        run(config)
        assert counters[0].calls == 5 * 3  # five records, three variants
        run(config)
        assert counters[1].calls == 0

    def test_interrupt_after_generation_resumes_without_regenerating(
        self, tiny_corpus, tmp_path, monkeypatch
    ):
        config = _config(tmp_path, tiny_corpus)
        counters = []

        import groundcheck.pipeline as pipeline_module

        original = pipeline_module.build_responder

        def counting_build(cfg):
            responder = original(cfg)
            counters.append(responder)
            return responder

        monkeypatch.setattr(pipeline_module, "build_responder", counting_build)

        partial = run(config, stop_after="generate")
        assert partial.artifacts == []
        assert counters[0].calls == 15
        assert not (config.out_dir / "summary.json").exists()

        # Fresh process rerun: scoring proceeds from cache, zero new calls.
        result = run(config)
        assert counters[1].calls == 0
        assert result.records_scored == 5

    def test_outputs_are_pure_function_of_config(self, tiny_corpus, tmp_path):
        config = _config(tmp_path, tiny_corpus)
        run(config)
        first = _hash_dir(config.out_dir)

        # Wipe everything and recompute from scratch.
        shutil.rmtree(config.out_dir)
        shutil.rmtree(config.cache_dir)
        run(config)
        assert _hash_dir(config.out_dir) == first

    def test_quarantine_on_undecodable_image(self, tiny_corpus, tmp_path):
        bad = tiny_corpus.parent / "images" / "q3.png"
        bad.write_bytes(b"this is not a png")
        config = _config(tmp_path, tiny_corpus)
        result = run(config)
        assert result.exit_code == 2
        assert result.records_scored == 4
        assert result.records_quarantined == 1
        quarantine = json.loads((config.out_dir / "quarantine.json").read_text())
        assert quarantine[0]["record_id"] == "q3"
        assert "reason" in quarantine[0]
        summary = json.loads((config.out_dir / "summary.json").read_text())
        assert summary["records_scored"] == 4
        assert summary["records_quarantined"] == 1

    def test_quarantine_on_missing_image(self, tiny_corpus, tmp_path):
        (tiny_corpus.parent / "images" / "q5.png").unlink()
        config = _config(tmp_path, tiny_corpus)
        result = run(config)
        assert result.exit_code == 2
        assert result.records_quarantined == 1

    def test_concurrency_bound_respected(self, tiny_corpus, tmp_path, monkeypatch):
        config = _config(tmp_path, tiny_corpus, concurrency=2)
        observed = []

        import groundcheck.pipeline as pipeline_module

        original = pipeline_module.build_responder

        def counting_build(cfg):
            responder = original(cfg)
            observed.append(responder)
            return responder

        monkeypatch.setattr(pipeline_module, "build_responder", counting_build)
        run(config)
        assert observed[0].max_in_flight <= 2

    def test_config_errors_are_fatal_preflight(self, tiny_corpus, tmp_path):
        with pytest.raises(ConfigurationError):
            run(_config(tmp_path, tiny_corpus, kernel_size=4))
        with pytest.raises(ConfigurationError):
            run(_config(tmp_path, tmp_path / "missing.jsonl"))
        with pytest.raises(ConfigurationError):
            run(_config(tmp_path, tiny_corpus), stop_after="nonsense")

    def test_limit_truncates(self, tiny_corpus, tmp_path):
        config = _config(tmp_path, tiny_corpus, limit=2)
        result = run(config)
        assert result.records_total == 2
        assert result.records_scored == 2

    def test_report_reemits_identical_artifacts(self, tiny_corpus, tmp_path):
        config = _config(tmp_path, tiny_corpus)
        run(config)
        before = _hash_dir(config.out_dir)
        emitted = report_from_state(config.out_dir)
        assert emitted
        assert _hash_dir(config.out_dir) == before

    def test_report_requires_state(self, tmp_path):
        with pytest.raises(ConfigurationError):
            report_from_state(tmp_path)

    def test_report_rejects_fully_quarantined_run(self, tiny_corpus, tmp_path):
        from groundcheck.errors import EmptyRunError

        for name in ("q1", "q2", "q3", "q4", "q5"):
            (tiny_corpus.parent / "images" / f"{name}.png").write_bytes(b"junk")
        config = _config(tmp_path, tiny_corpus)
        result = run(config)
        assert result.records_scored == 0
        assert result.exit_code == 2
        with pytest.raises(EmptyRunError):
            report_from_state(config.out_dir)

    def test_kernel_change_regenerates_only_filtered_variants(
        self, tiny_corpus, tmp_path, monkeypatch
    ):
        counters = []

        import groundcheck.pipeline as pipeline_module

        original = pipeline_module.build_responder

        def counting_build(cfg):
            responder = original(cfg)
            counters.append(responder)
            return responder

        monkeypatch.setattr(pipeline_module, "build_responder", counting_build)

        run(_config(tmp_path, tiny_corpus, kernel_size=3))
        assert counters[0].calls == 15
        # Same cache, new kernel: only NR depends on the kernel, so only its
        # five generations rerun; ORG and EE replay from cache.
        run(_config(tmp_path, tiny_corpus, kernel_size=5))
        assert counters[1].calls == 5

    def test_generation_cache_hit_sets_from_cache_flag(self, tiny_corpus, tmp_path):
        from groundcheck.cache import FileCache
        from groundcheck.corpus import fetch_image_bytes, load_manifest
        from groundcheck.imaging.buffer import decode_image
        from groundcheck.pipeline import _RecordWorker, build_nli_client, build_responder

        config = _config(tmp_path, tiny_corpus)
        manifest = load_manifest(tiny_corpus)
        record = manifest.records[0]
        worker = _RecordWorker(
            config, FileCache(config.cache_dir), build_responder(config), build_nli_client(config)
        )
        raw = fetch_image_bytes(record, manifest.base_dir)
        png = worker._variant_png(record, "x" * 64, decode_image(raw), Variant.ORG)

        first = worker._generate(record, Variant.ORG, png)
        second = worker._generate(record, Variant.ORG, png)
        assert first.from_cache is False
        assert second.from_cache is True
        assert second.samples == first.samples

    def test_fixture_responder_and_nli_table_flow_through(self, tiny_corpus, tmp_path):
        fixture = tmp_path / "fixture.json"
        fixture.write_text(
            json.dumps(
                [
                    {
                        "record_id": "q1",
                        "variant": variant,
                        "samples": ["The kite is red."],
                    }
                    for variant in ("org", "nr", "ee")
                ]
            )
        )
        config = _config(tmp_path, tiny_corpus, responder_fixture=fixture, policy="oracle")
        result = run(config)
        assert result.records_scored == 5
        state = json.loads((config.out_dir / "state.json").read_text())
        q1 = next(t for t in state["triples"] if t["record_id"] == "q1")
        # Fixture answer matches the reference answer: near-zero contradiction.
        assert q1["nli_org"] < 0.01
        assert q1["nli_nr"] < 0.01
        assert q1["nli_ee"] < 0.01


class TestBuildResponder:
    def test_mock_by_default(self, tiny_corpus, tmp_path):
        from groundcheck.responder import MockResponder

        assert isinstance(build_responder(_config(tmp_path, tiny_corpus)), MockResponder)

    def test_http_for_urls(self, tiny_corpus, tmp_path):
        from groundcheck.responder import HttpResponder

        config = _config(tmp_path, tiny_corpus, responder="http://llm.test/api")
        assert isinstance(build_responder(config), HttpResponder)
