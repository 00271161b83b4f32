import json

import httpx
import pytest

from groundcheck.errors import (
    ConfigurationError,
    InvalidArgumentError,
    TransportError,
)
from groundcheck.nli_client import HttpNliClient, NliLogits, StubNliClient
from groundcheck.scoring import contradiction_probability


class TestNliLogits:
    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            NliLogits(float("nan"), 0.0, 0.0)
        with pytest.raises(InvalidArgumentError):
            NliLogits(0.0, 0.0, float("-inf"))


class TestStubNliClient:
    def test_table_lookup_exact(self):
        table = {("p", "h"): NliLogits(1.0, 2.0, 3.0)}
        stub = StubNliClient(table=table)
        assert stub.logits([("p", "h")]) == [NliLogits(1.0, 2.0, 3.0)]

    def test_identical_pair_scores_entailment(self):
        stub = StubNliClient()
        (logits,) = stub.logits([("The hose is black.", "The hose is black.")])
        assert contradiction_probability(logits) < 0.1

    def test_fallback_deterministic_across_instances(self):
        a = StubNliClient(seed=3).logits([("premise text", "hypothesis text")])
        b = StubNliClient(seed=3).logits([("premise text", "hypothesis text")])
        assert a == b

    def test_fallback_varies_with_seed(self):
        a = StubNliClient(seed=1).logits([("premise text", "hypothesis text")])
        b = StubNliClient(seed=2).logits([("premise text", "hypothesis text")])
        assert a != b

    def test_from_table_file(self, tmp_path):
        path = tmp_path / "table.json"
        path.write_text(
            json.dumps(
                [{"premise": "p", "hypothesis": "h", "logits": [5.0, 0.0, -5.0]}]
            )
        )
        stub = StubNliClient.from_table_file(path)
        assert stub.logits([("p", "h")]) == [NliLogits(5.0, 0.0, -5.0)]

    def test_order_preserved(self):
        stub = StubNliClient()
        pairs = [(f"p{i}", f"h{i}") for i in range(10)]
        whole = stub.logits(pairs)
        assert whole == [stub.logits([pair])[0] for pair in pairs]


def _wire_app(fail_first: int = 0):
    """Minimal transport implementing the NLI wire format."""
    state = {"failures": 0, "requests": []}

    def handler(request: httpx.Request) -> httpx.Response:
        if state["failures"] < fail_first:
            state["failures"] += 1
            return httpx.Response(503)
        body = json.loads(request.content)
        state["requests"].append(body)
        logits = [
            [float(len(pair["premise"])), 0.0, float(len(pair["hypothesis"]))]
            for pair in body["pairs"]
        ]
        return httpx.Response(
            200,
            json={
                "model_id": body["model_id"],
                "logits": logits,
                "truncated": [False] * len(logits),
            },
        )

    return httpx.MockTransport(handler), state


class TestHttpNliClient:
    def test_round_trip_and_order(self):
        transport, state = _wire_app()
        client = HttpNliClient("http://nli.test", transport=transport)
        out = client.logits([("aa", "b"), ("cccc", "ddd")])
        assert out == [NliLogits(2.0, 0.0, 1.0), NliLogits(4.0, 0.0, 3.0)]

    def test_chunks_large_batches(self):
        transport, state = _wire_app()
        client = HttpNliClient("http://nli.test", batch_size=2, transport=transport)
        client.logits([("p", "h")] * 5)
        assert [len(r["pairs"]) for r in state["requests"]] == [2, 2, 1]

    def test_retries_transient_failures(self):
        transport, _ = _wire_app(fail_first=2)
        client = HttpNliClient(
            "http://nli.test", max_attempts=3, backoff_base=0.0, transport=transport
        )
        assert client.logits([("p", "h")])[0] == NliLogits(1.0, 0.0, 1.0)

    def test_gives_up_after_max_attempts(self):
        transport, _ = _wire_app(fail_first=10)
        client = HttpNliClient(
            "http://nli.test", max_attempts=2, backoff_base=0.0, transport=transport
        )
        with pytest.raises(TransportError):
            client.logits([("p", "h")])

    def test_auth_failure_is_fatal(self):
        transport = httpx.MockTransport(lambda request: httpx.Response(401))
        client = HttpNliClient("http://nli.test", transport=transport)
        with pytest.raises(ConfigurationError):
            client.logits([("p", "h")])

    def test_length_mismatch_rejected(self):
        transport = httpx.MockTransport(
            lambda request: httpx.Response(
                200, json={"model_id": "m", "logits": [], "truncated": []}
            )
        )
        client = HttpNliClient("http://nli.test", transport=transport)
        with pytest.raises(TransportError, match="length"):
            client.logits([("p", "h")])
