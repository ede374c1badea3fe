"""Request/response models for the service API (and the thin CLI client)."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ErrorDetail(BaseModel):
    kind: str
    message: str
    line: int | None = None
    section: str | None = None
    shortfall: int | None = None


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"
    version: str


class ValidateRequest(StrictModel):
    document: str


class ValidateResponse(BaseModel):
    ok: bool = True
    name: str
    nf_types: int
    footprint: int


class SimulateRequest(StrictModel):
    capacity_vms: int = Field(default=100, ge=1)
    catalog_size: int = Field(default=10, ge=1)
    max_ns_size: int = Field(default=3, ge=1)
    nf_instances: int = Field(default=3, ge=1)
    reuse_capacity: int = Field(default=3, ge=1)
    policy: Literal["separation", "cooperation", "both"] = "both"
    seed: int = Field(default=0, ge=0)
    seeds: int = Field(default=1, ge=1)
    count_mode: Literal["fixed", "uniform"] = "fixed"
    jobs: int = Field(default=1, ge=1)


class EpisodeRow(BaseModel):
    policy: str
    seed: int
    capacity_vms: int
    catalog_size: int
    max_ns_size: int
    nf_instances: int
    reuse_capacity: int
    accepted: int
    vms_used: int
    total_reused: int


class SimulateResponse(BaseModel):
    csv: str
    rows: list[EpisodeRow]


class ReproduceRequest(StrictModel):
    target: Literal["fig5a", "fig5b"]
    seeds: int = Field(default=30, ge=1)
    seed: int = Field(default=0, ge=0)
    capacity_vms: int = Field(default=100, ge=1)
    catalog_size: int = Field(default=10, ge=1)
    count_mode: Literal["fixed", "uniform"] = "fixed"
    cmax_grid: list[int] = Field(default=[1, 4, 7], min_length=1)
    jobs: int = Field(default=1, ge=1)


class SweepPointOut(BaseModel):
    params: dict[str, int]
    sep_mean: float
    coop_mean: float
    gain_pct: float | None


class ReproduceResponse(BaseModel):
    target: str
    csv: str
    summary: str
    points: list[SweepPointOut]


class OracleRequest(StrictModel):
    trials: int = Field(default=100, ge=1)
    catalog_size: int = Field(default=1, ge=1)
    requests: int = Field(default=2, ge=1)
    reuse_capacity: int = Field(default=2, ge=1)
    capacity_vms: int = Field(default=10, ge=1)
    count_max: int = Field(default=1, ge=1)
    size_max: int = Field(default=2, ge=1)
    initial_services: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0)
    max_nodes: int = Field(default=200_000, ge=1)


class OracleTrial(BaseModel):
    trial: int
    heuristic: int
    oracle: int
    ratio: float
    nodes: int


class OracleResponse(BaseModel):
    report: str
    trials: int
    violations: int
    optimal_count: int
    min_ratio: float
    mean_ratio: float
    results: list[OracleTrial]


class SubmitRequest(StrictModel):
    document: str
    vim: str = "default"


class PlanOut(BaseModel):
    request_id: int
    reuse_source: int | None
    reused: dict[int, int]
    deployed_new: dict[int, int]
    new_vms: int


class RecordOut(BaseModel):
    mes_id: int
    name: str
    vim: str
    state: str
    mea_state: str
    ns_state: str
    mea_instances: int
    plan: PlanOut


class PoolOut(BaseModel):
    vim: str
    capacity_vms: int
    used_vms: int
    reuse_capacity: int
    offered: int


class SubmitResponse(BaseModel):
    mes_id: int
    record: RecordOut


class EventRequest(StrictModel):
    target: Literal["MEA", "NS"]
    outcome: Literal["deployed", "failed", "metric"]
    metric_name: str | None = None
    metric_value: float | None = None


class ListResponse(BaseModel):
    records: list[RecordOut]
    pools: list[PoolOut]


class LogResponse(BaseModel):
    log: str


class DemoRequest(StrictModel):
    document: str
    script: str
    capacity_vms: int = Field(default=100, ge=1)
    reuse_capacity: int = Field(default=3, ge=1)


class DemoResponse(BaseModel):
    log: str
    final_state: str
    ok: bool
