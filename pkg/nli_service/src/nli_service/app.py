"""HTTP surface: POST /v1/nli for batched logits, GET /healthz."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from nli_service.config import ServiceConfig
from nli_service.engine import build_engine


class PairModel(BaseModel):
    premise: str
    hypothesis: str


class NliBatchRequest(BaseModel):
    model_id: str = "default"
    pairs: list[PairModel] = Field(min_length=1)


class NliBatchReply(BaseModel):
    model_id: str
    logits: list[list[float]]
    truncated: list[bool]


class HealthReply(BaseModel):
    status: str = "ok"


def create_app(config: ServiceConfig | None = None, engine=None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    engine = engine if engine is not None else build_engine(config)

    app = FastAPI(title="nli-service", version="0.1.0")

    @app.get("/healthz", response_model=HealthReply)
    def healthz():
        return HealthReply()

    @app.post("/v1/nli", response_model=NliBatchReply)
    def serve_logits(request: NliBatchRequest):
        if len(request.pairs) > config.max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.pairs)} exceeds limit {config.max_batch}",
            )
        for index, pair in enumerate(request.pairs):
            if not pair.premise.strip() or not pair.hypothesis.strip():
                raise HTTPException(
                    status_code=400, detail=f"pair {index} has empty text"
                )
        pairs = [(pair.premise, pair.hypothesis) for pair in request.pairs]
        logits, truncated = engine.batch_logits(pairs)
        return NliBatchReply(
            model_id=request.model_id,
            logits=[list(triple) for triple in logits],
            truncated=truncated,
        )

    return app
