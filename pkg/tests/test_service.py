import base64
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from groundcheck.imaging.buffer import ImageBuffer, decode_image, encode_png
from groundcheck.service.app import create_app


@pytest.fixture
def client():
    with TestClient(create_app()) as test_client:
        yield test_client


def _wait_for_run(client, run_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        status = client.get(f"/v1/runs/{run_id}").json()
        if status["state"] != "running":
            return status
        time.sleep(0.05)
    raise AssertionError("run did not finish in time")


def test_healthz(client):
    reply = client.get("/healthz")
    assert reply.status_code == 200
    assert reply.json() == {"status": "ok"}


class TestFiltersEndpoint:
    def test_returns_three_variants(self, client, rng):
        img = ImageBuffer(rng.integers(0, 256, size=(10, 10, 3), dtype=np.uint8))
        payload = {
            "image_base64": base64.b64encode(encode_png(img)).decode(),
            "kernel_size": 3,
        }
        reply = client.post("/v1/filters", json=payload)
        assert reply.status_code == 200
        variants = reply.json()["variants"]
        assert set(variants) == {"org", "nr", "ee"}
        org = decode_image(base64.b64decode(variants["org"]))
        assert np.array_equal(org.pixels, img.pixels)
        nr = decode_image(base64.b64decode(variants["nr"]))
        assert (nr.height, nr.width) == (10, 10)

    def test_rejects_bad_base64(self, client):
        reply = client.post("/v1/filters", json={"image_base64": "!!!not-base64!!!"})
        assert reply.status_code == 400

    def test_rejects_non_image_payload(self, client):
        payload = {"image_base64": base64.b64encode(b"hello").decode()}
        reply = client.post("/v1/filters", json=payload)
        assert reply.status_code == 400

    def test_rejects_bad_kernel(self, client, rng):
        img = ImageBuffer(rng.integers(0, 256, size=(6, 6, 3), dtype=np.uint8))
        payload = {
            "image_base64": base64.b64encode(encode_png(img)).decode(),
            "kernel_size": 4,
        }
        reply = client.post("/v1/filters", json=payload)
        assert reply.status_code == 400


class TestRunEndpoints:
    def _submit(self, client, tiny_corpus, tmp_path, **overrides):
        body = {
            "manifest": str(tiny_corpus),
            "out_dir": str(tmp_path / "out"),
            "cache_dir": str(tmp_path / "cache"),
            "kernel_size": 3,
            "sample_count": 2,
            "policy": "both",
            "seed": 3,
        }
        body.update(overrides)
        return client.post("/v1/runs", json=body)

    def test_lifecycle(self, client, tiny_corpus, tmp_path):
        reply = self._submit(client, tiny_corpus, tmp_path)
        assert reply.status_code == 200
        run_id = reply.json()["run_id"]

        status = _wait_for_run(client, run_id)
        assert status["state"] == "completed"
        assert status["exit_code"] == 0
        assert status["records_scored"] == 5

        summary = client.get(f"/v1/runs/{run_id}/summary")
        assert summary.status_code == 200
        assert set(summary.json()["policies"]) == {"oracle_min", "category_route"}

    def test_invalid_config_rejected_preflight(self, client, tiny_corpus, tmp_path):
        reply = self._submit(client, tiny_corpus, tmp_path, kernel_size=4)
        assert reply.status_code == 400
        reply = self._submit(client, tiny_corpus, tmp_path, manifest="/nope.jsonl")
        assert reply.status_code == 400

    def test_unknown_run_is_404(self, client):
        assert client.get("/v1/runs/doesnotexist").status_code == 404

    def test_summary_conflicts_while_running(self, client, tiny_corpus, tmp_path):
        reply = self._submit(client, tiny_corpus, tmp_path)
        run_id = reply.json()["run_id"]
        status_code = client.get(f"/v1/runs/{run_id}/summary").status_code
        assert status_code in (200, 409)  # depends on completion timing
        _wait_for_run(client, run_id)

    def test_report_endpoint_reemits(self, client, tiny_corpus, tmp_path):
        reply = self._submit(client, tiny_corpus, tmp_path)
        run_id = reply.json()["run_id"]
        status = _wait_for_run(client, run_id)
        report = client.post("/v1/reports", json={"run_dir": status["out_dir"]})
        assert report.status_code == 200
        assert any("summary.json" in a for a in report.json()["artifacts"])

    def test_report_unknown_dir_is_404(self, client, tmp_path):
        reply = client.post("/v1/reports", json={"run_dir": str(tmp_path)})
        assert reply.status_code == 404
