import pytest
from fastapi.testclient import TestClient

from nli_service.app import create_app
from nli_service.config import ServiceConfig
from nli_service.engine import StubEngine


@pytest.fixture
def stub_config():
    return ServiceConfig(mode="stub", max_batch=16)


@pytest.fixture
def client(stub_config):
    app = create_app(stub_config, engine=StubEngine(seed=0))
    with TestClient(app) as test_client:
        yield test_client


def post_pairs(client, pairs, model_id="default"):
    return client.post(
        "/v1/nli",
        json={
            "model_id": model_id,
            "pairs": [{"premise": p, "hypothesis": h} for p, h in pairs],
        },
    )
