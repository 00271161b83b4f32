"""FastAPI wrapper around the batch pipeline.

Runs execute in background threads and are polled by id; the CLI is a thin
client of these endpoints. The registry is in-memory: one service process
owns its runs (multi-host scheduling is out of scope).
"""

from __future__ import annotations

import base64
import binascii
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException

from groundcheck.config import RunConfig
from groundcheck.errors import ConfigurationError, GroundcheckError, InvalidArgumentError
from groundcheck.imaging.buffer import decode_image, encode_png
from groundcheck.imaging.variants import BlendWeights, FilterSpec, NrMode, Variant, apply_variant
from groundcheck.pipeline import RunResult, report_from_state, run
from groundcheck.scoring import PremiseMode
from groundcheck.service.schemas import (
    FilterReply,
    FilterRequest,
    HealthReply,
    ReportReply,
    ReportRequest,
    RunCreated,
    RunRequest,
    RunStatus,
)


@dataclass
class _RunHandle:
    run_id: str
    state: str = "running"
    result: RunResult | None = None
    error: str | None = None
    thread: threading.Thread | None = field(default=None, repr=False)


class _Registry:
    def __init__(self):
        self._runs: dict[str, _RunHandle] = {}
        self._lock = threading.Lock()

    def add(self, handle: _RunHandle) -> None:
        with self._lock:
            self._runs[handle.run_id] = handle

    def get(self, run_id: str) -> _RunHandle | None:
        with self._lock:
            return self._runs.get(run_id)


def _config_from_request(req: RunRequest) -> RunConfig:
    return RunConfig(
        manifest=Path(req.manifest),
        out_dir=Path(req.out_dir),
        cache_dir=Path(req.cache_dir),
        limit=req.limit,
        kernel_size=req.kernel_size,
        nr_mode=NrMode(req.nr_mode),
        blend=BlendWeights(req.blend.alpha, req.blend.beta, req.blend.gamma),
        sample_count=req.sample_count,
        premise_mode=PremiseMode(req.premise_mode),
        responder=req.responder,
        nli=req.nli,
        policy=req.policy,
        concurrency=req.concurrency,
        seed=req.seed,
        strict=req.strict,
        model_id=req.model_id,
        temperature=req.temperature,
        responder_fixture=Path(req.responder_fixture) if req.responder_fixture else None,
        nli_table=Path(req.nli_table) if req.nli_table else None,
        nli_model_id=req.nli_model_id,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="groundcheck", version="0.1.0")
    registry = _Registry()

    @app.get("/healthz", response_model=HealthReply)
    def healthz():
        return HealthReply()

    @app.post("/v1/runs", response_model=RunCreated)
    def create_run(req: RunRequest):
        try:
            config = _config_from_request(req)
            config.validate()
        except (ConfigurationError, InvalidArgumentError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

        handle = _RunHandle(run_id=uuid.uuid4().hex[:12])

        def _execute():
            try:
                handle.result = run(config)
                handle.state = "completed"
            except Exception as exc:
                handle.error = f"{type(exc).__name__}: {exc}"
                handle.state = "failed"

        handle.thread = threading.Thread(target=_execute, daemon=True)
        registry.add(handle)
        handle.thread.start()
        return RunCreated(run_id=handle.run_id, state=handle.state)

    @app.get("/v1/runs/{run_id}", response_model=RunStatus)
    def run_status(run_id: str):
        handle = registry.get(run_id)
        if handle is None:
            raise HTTPException(status_code=404, detail=f"unknown run: {run_id}")
        status = RunStatus(run_id=run_id, state=handle.state, error=handle.error)
        if handle.result is not None:
            status.exit_code = handle.result.exit_code
            status.records_total = handle.result.records_total
            status.records_scored = handle.result.records_scored
            status.records_quarantined = handle.result.records_quarantined
            status.out_dir = str(handle.result.out_dir)
        return status

    @app.get("/v1/runs/{run_id}/summary")
    def run_summary(run_id: str):
        handle = registry.get(run_id)
        if handle is None:
            raise HTTPException(status_code=404, detail=f"unknown run: {run_id}")
        if handle.state != "completed" or handle.result is None:
            raise HTTPException(status_code=409, detail=f"run is {handle.state}")
        summary_path = handle.result.out_dir / "summary.json"
        if not summary_path.is_file():
            raise HTTPException(status_code=404, detail="run produced no summary")
        return json.loads(summary_path.read_text(encoding="utf-8"))

    @app.post("/v1/reports", response_model=ReportReply)
    def rebuild_report(req: ReportRequest):
        try:
            artifacts = report_from_state(req.run_dir)
        except ConfigurationError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except GroundcheckError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return ReportReply(artifacts=[str(p) for p in artifacts])

    @app.post("/v1/filters", response_model=FilterReply)
    def filter_image(req: FilterRequest):
        try:
            raw = base64.b64decode(req.image_base64, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"invalid base64: {exc}")
        try:
            src = decode_image(raw)
            weights = BlendWeights(req.blend.alpha, req.blend.beta, req.blend.gamma)
            variants = {}
            for variant in (Variant.ORG, Variant.NR, Variant.EE):
                spec = FilterSpec(
                    variant=variant,
                    kernel_size=req.kernel_size,
                    nr_mode=NrMode(req.nr_mode),
                    blend=weights,
                )
                png = encode_png(apply_variant(src, spec))
                variants[variant.value] = base64.b64encode(png).decode("ascii")
        except InvalidArgumentError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return FilterReply(variants=variants)

    return app


app = create_app()
