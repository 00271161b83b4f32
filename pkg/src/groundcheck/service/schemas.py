"""Request/response models of the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class BlendWeightsModel(BaseModel):
    alpha: float = 1.5
    beta: float = -0.5
    gamma: float = 0.0


class RunRequest(BaseModel):
    manifest: str
    out_dir: str
    cache_dir: str
    limit: Optional[int] = None
    kernel_size: int = 15
    nr_mode: Literal["pure", "blended"] = "pure"
    blend: BlendWeightsModel = Field(default_factory=BlendWeightsModel)
    sample_count: int = 3
    premise_mode: Literal["reference", "self"] = "reference"
    responder: str = "mock"
    nli: str = "stub"
    policy: Literal["oracle", "route", "both"] = "oracle"
    concurrency: int = 4
    seed: int = 0
    strict: bool = False
    model_id: str = "gpt-3.5"
    temperature: float = 0.7
    responder_fixture: Optional[str] = None
    nli_table: Optional[str] = None
    nli_model_id: str = "default"


class RunCreated(BaseModel):
    run_id: str
    state: str


class RunStatus(BaseModel):
    run_id: str
    state: Literal["running", "completed", "failed"]
    exit_code: Optional[int] = None
    records_total: Optional[int] = None
    records_scored: Optional[int] = None
    records_quarantined: Optional[int] = None
    out_dir: Optional[str] = None
    error: Optional[str] = None


class ReportRequest(BaseModel):
    run_dir: str


class ReportReply(BaseModel):
    artifacts: list[str]


class FilterRequest(BaseModel):
    image_base64: str
    kernel_size: int = 15
    nr_mode: Literal["pure", "blended"] = "pure"
    blend: BlendWeightsModel = Field(default_factory=BlendWeightsModel)


class FilterReply(BaseModel):
    variants: dict[str, str]  # variant name -> base64 PNG


class HealthReply(BaseModel):
    status: str = "ok"
