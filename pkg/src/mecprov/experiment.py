"""Seeded acceptance-episode simulation and the capacity/size/sharing sweeps.

An episode starts from an empty pool, generates requests one after another
and places each before drawing the next, stopping at the first rejection.
Generation never looks at placement state; one seed produces the same
request stream under every policy, so paired comparisons are exact.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .model import MESRequest, NOMINAL_MEA, NSSpec, footprint
from .placement import (
    COOPERATION,
    POLICIES,
    PlacementPlan,
    PoolState,
    Rejected,
    SEPARATION,
    place,
)
from .rng import SplitMix64

COUNT_FIXED = "fixed"
COUNT_UNIFORM = "uniform"
COUNT_MODES = (COUNT_FIXED, COUNT_UNIFORM)

CSV_HEADER = (
    "policy,seed,capacity_vms,catalog_size,max_ns_size,"
    "nf_instances,reuse_capacity,accepted,vms_used,total_reused"
)


class UndefinedGainError(ValueError):
    """Gain is undefined when the separation mean is zero."""


def gain_percent(coop_mean: float, sep_mean: float) -> float:
    """Relative gain of cooperation over separation, in percent."""
    if sep_mean == 0:
        raise UndefinedGainError("gain is undefined for sep_mean = 0")
    return 100.0 * (coop_mean - sep_mean) / sep_mean


@dataclass(frozen=True)
class ExperimentConfig:
    capacity_vms: int = 100
    catalog_size: int = 10
    max_ns_size: int = 3
    nf_instances: int = 3
    reuse_capacity: int = 3
    policy: str = SEPARATION
    seed: int = 0
    count_mode: str = COUNT_FIXED

    def __post_init__(self) -> None:
        if self.capacity_vms < 1:
            raise ValueError("capacity_vms must be >= 1")
        if not 1 <= self.max_ns_size <= self.catalog_size:
            raise ValueError(
                "max_ns_size must satisfy 1 <= max_ns_size <= catalog_size "
                "(got %d with catalog %d)" % (self.max_ns_size, self.catalog_size)
            )
        if self.nf_instances < 1:
            raise ValueError("nf_instances must be >= 1")
        if self.reuse_capacity < 1:
            raise ValueError("reuse_capacity must be >= 1")
        if self.policy not in POLICIES:
            raise ValueError("policy must be one of %s" % (POLICIES,))
        if self.count_mode not in COUNT_MODES:
            raise ValueError("count_mode must be one of %s" % (COUNT_MODES,))


@dataclass
class TraceEntry:
    request: MESRequest
    plan: PlacementPlan | None
    rejection: Rejected | None

    def to_jsonable(self) -> dict:
        entry: dict = {
            "request": {"id": self.request.id, "ns": dict(self.request.ns.members)},
        }
        if self.plan is not None:
            entry["plan"] = {
                "reuse_source": self.plan.reuse_source,
                "reused": dict(self.plan.reused),
                "deployed_new": dict(self.plan.deployed_new),
                "new_vms": self.plan.new_vms,
            }
        if self.rejection is not None:
            entry["rejected"] = {"shortfall": self.rejection.shortfall}
        return entry


@dataclass
class EpisodeResult:
    accepted_count: int
    vms_used: int
    total_reused: int
    rejection_shortfall: int
    trace: list[TraceEntry] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {
            "accepted_count": self.accepted_count,
            "vms_used": self.vms_used,
            "total_reused": self.total_reused,
            "rejection_shortfall": self.rejection_shortfall,
            "trace": [entry.to_jsonable() for entry in self.trace],
        }

    def serialize(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True, separators=(",", ":"))


def generate_request(rng: SplitMix64, cfg: ExperimentConfig, request_id: int = 0) -> MESRequest:
    """Draw one request: size, then types, then counts (fixed draw order).

    Size is uniform on 1..max_ns_size, types are sampled without replacement
    from the catalog, and each type gets nf_instances instances (fixed mode)
    or a uniform count on 1..nf_instances.
    """
    size = rng.randint(1, cfg.max_ns_size)
    types = rng.sample(cfg.catalog_size, size)
    if cfg.count_mode == COUNT_FIXED:
        members = {t: cfg.nf_instances for t in types}
    else:
        members = {t: rng.randint(1, cfg.nf_instances) for t in types}
    return MESRequest(request_id, NOMINAL_MEA, NSSpec(members))


def run_episode(cfg: ExperimentConfig) -> EpisodeResult:
    """Generate-and-place until the pool refuses a request."""
    pool = PoolState(cfg.capacity_vms, cfg.reuse_capacity)
    rng = SplitMix64(cfg.seed)
    trace: list[TraceEntry] = []
    accepted = 0
    total_reused = 0
    request_id = 0
    while True:
        request = generate_request(rng, cfg, request_id)
        request_id += 1
        outcome = place(request, pool, cfg.policy)
        if isinstance(outcome, Rejected):
            trace.append(TraceEntry(request, None, outcome))
            return EpisodeResult(accepted, pool.used_vms, total_reused, outcome.shortfall, trace)
        accepted += 1
        total_reused += outcome.total_reused
        trace.append(TraceEntry(request, outcome, None))


def audit_episode(result: EpisodeResult, initial_footprint: int = 0) -> bool:
    """Deployed-VM identity: used = initial + accepted footprints - reuse."""
    accepted_fp = sum(footprint(e.request.ns) for e in result.trace if e.plan is not None)
    return result.vms_used == initial_footprint + accepted_fp - result.total_reused


def episode_csv_row(policy: str, seed: int, cfg: ExperimentConfig, result: EpisodeResult) -> str:
    return ",".join(
        str(v)
        for v in (
            policy,
            seed,
            cfg.capacity_vms,
            cfg.catalog_size,
            cfg.max_ns_size,
            cfg.nf_instances,
            cfg.reuse_capacity,
            result.accepted_count,
            result.vms_used,
            result.total_reused,
        )
    )


def _run_many(cfgs: list[ExperimentConfig], jobs: int) -> list[EpisodeResult]:
    if jobs <= 1 or len(cfgs) <= 1:
        return [run_episode(cfg) for cfg in cfgs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_episode, cfgs))


def run_paired_batch(
    base: ExperimentConfig, seeds: list[int], jobs: int = 1
) -> list[tuple[int, EpisodeResult, EpisodeResult]]:
    """Both policies over shared streams; returns (seed, separation, cooperation)."""
    cfgs: list[ExperimentConfig] = []
    for seed in seeds:
        cfgs.append(replace(base, policy=SEPARATION, seed=seed))
        cfgs.append(replace(base, policy=COOPERATION, seed=seed))
    results = _run_many(cfgs, jobs)
    return [(seed, results[2 * i], results[2 * i + 1]) for i, seed in enumerate(seeds)]


@dataclass
class SweepPoint:
    params: dict[str, int]
    cfg: ExperimentConfig
    results: list[tuple[int, EpisodeResult, EpisodeResult]]
    sep_mean: float
    coop_mean: float
    gain_pct: float | None

    def summary_line(self, label: str) -> str:
        params = " ".join("%s=%d" % (k, v) for k, v in self.params.items())
        gain = "undef" if self.gain_pct is None else "%.2f" % self.gain_pct
        return "# %s %s sep_mean=%.3f coop_mean=%.3f gain_pct=%s" % (
            label,
            params,
            self.sep_mean,
            self.coop_mean,
            gain,
        )


@dataclass
class SweepResult:
    label: str
    seeds: list[int]
    points: list[SweepPoint]

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for point in self.points:
            for seed, sep, coop in point.results:
                lines.append(episode_csv_row(SEPARATION, seed, point.cfg, sep))
                lines.append(episode_csv_row(COOPERATION, seed, point.cfg, coop))
        return "\n".join(lines) + "\n"

    def summary_lines(self) -> list[str]:
        return [point.summary_line(self.label) for point in self.points]


def _sweep_point(
    base: ExperimentConfig, params: dict[str, int], seeds: list[int], jobs: int
) -> SweepPoint:
    cfg = replace(base, **params)
    results = run_paired_batch(cfg, seeds, jobs)
    sep_mean = sum(r[1].accepted_count for r in results) / len(results)
    coop_mean = sum(r[2].accepted_count for r in results) / len(results)
    gain = None if sep_mean == 0 else gain_percent(coop_mean, sep_mean)
    return SweepPoint(params, cfg, results, sep_mean, coop_mean, gain)


def run_sweep_fig5a(
    seeds: list[int],
    *,
    capacity_vms: int = 100,
    catalog_size: int = 10,
    count_mode: str = COUNT_FIXED,
    jobs: int = 1,
) -> SweepResult:
    """Vary the maximum NS size 1..6 with 3 instances per type and 3 shares."""
    if not seeds:
        raise ValueError("at least one seed is required")
    base = ExperimentConfig(
        capacity_vms=capacity_vms,
        catalog_size=catalog_size,
        nf_instances=3,
        reuse_capacity=3,
        count_mode=count_mode,
    )
    points = [
        _sweep_point(base, {"max_ns_size": smax}, seeds, jobs) for smax in range(1, 7)
    ]
    return SweepResult("fig5a", list(seeds), points)


def run_sweep_fig5b(
    seeds: list[int],
    *,
    capacity_vms: int = 100,
    catalog_size: int = 10,
    count_mode: str = COUNT_FIXED,
    cmax_grid: tuple[int, ...] = (1, 4, 7),
    jobs: int = 1,
) -> SweepResult:
    """Vary per-type instances 1..6 across the share-capacity grid.

    The single (nf_instances=3, reuse_capacity=5) point is appended for the
    headline-gain check when the grid does not already contain it.
    """
    if not seeds:
        raise ValueError("at least one seed is required")
    base = ExperimentConfig(
        capacity_vms=capacity_vms,
        catalog_size=catalog_size,
        max_ns_size=3,
        count_mode=count_mode,
    )
    grid: list[dict[str, int]] = [
        {"nf_instances": y, "reuse_capacity": cmax}
        for cmax in cmax_grid
        for y in range(1, 7)
    ]
    headline = {"nf_instances": 3, "reuse_capacity": 5}
    if headline not in grid:
        grid.append(headline)
    points = [_sweep_point(base, params, seeds, jobs) for params in grid]
    return SweepResult("fig5b", list(seeds), points)
