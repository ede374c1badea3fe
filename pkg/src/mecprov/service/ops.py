"""Handler logic behind the API routes.

Every function maps a request model to a response model and raises domain
exceptions; the app module translates those to HTTP errors and the CLI's
local mode calls these functions directly.
"""

from __future__ import annotations

from dataclasses import replace

from ..descriptor import parse_mesd, to_request
from ..experiment import (
    CSV_HEADER,
    COOPERATION,
    ExperimentConfig,
    SEPARATION,
    episode_csv_row,
    run_paired_batch,
    run_episode,
    run_sweep_fig5a,
    run_sweep_fig5b,
)
from ..model import NFCatalog, footprint
from ..oracle import oracle_optimal_reuse, random_instance
from ..orchestrator import MESRecord, MockBackendEvent, Orchestrator, parse_event_script
from ..placement import PoolState, place_sequence
from ..rng import SplitMix64
from . import schemas


def validate_descriptor(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
    mesd = parse_mesd(req.document)
    request = to_request(mesd, NFCatalog())
    return schemas.ValidateResponse(
        name=mesd.name, nf_types=request.ns.size(), footprint=footprint(request.ns)
    )


def run_simulation(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    base = ExperimentConfig(
        capacity_vms=req.capacity_vms,
        catalog_size=req.catalog_size,
        max_ns_size=req.max_ns_size,
        nf_instances=req.nf_instances,
        reuse_capacity=req.reuse_capacity,
        count_mode=req.count_mode,
    )
    seeds = list(range(req.seed, req.seed + req.seeds))
    rows: list[schemas.EpisodeRow] = []
    lines = [CSV_HEADER]

    def add(policy: str, seed: int, result) -> None:
        lines.append(episode_csv_row(policy, seed, base, result))
        rows.append(
            schemas.EpisodeRow(
                policy=policy,
                seed=seed,
                capacity_vms=base.capacity_vms,
                catalog_size=base.catalog_size,
                max_ns_size=base.max_ns_size,
                nf_instances=base.nf_instances,
                reuse_capacity=base.reuse_capacity,
                accepted=result.accepted_count,
                vms_used=result.vms_used,
                total_reused=result.total_reused,
            )
        )

    if req.policy == "both":
        for seed, sep, coop in run_paired_batch(base, seeds, req.jobs):
            add(SEPARATION, seed, sep)
            add(COOPERATION, seed, coop)
    else:
        for seed in seeds:
            result = run_episode(replace(base, policy=req.policy, seed=seed))
            add(req.policy, seed, result)
    return schemas.SimulateResponse(csv="\n".join(lines) + "\n", rows=rows)


def reproduce_figure(req: schemas.ReproduceRequest) -> schemas.ReproduceResponse:
    seeds = list(range(req.seed, req.seed + req.seeds))
    if req.target == "fig5a":
        sweep = run_sweep_fig5a(
            seeds,
            capacity_vms=req.capacity_vms,
            catalog_size=req.catalog_size,
            count_mode=req.count_mode,
            jobs=req.jobs,
        )
    else:
        sweep = run_sweep_fig5b(
            seeds,
            capacity_vms=req.capacity_vms,
            catalog_size=req.catalog_size,
            count_mode=req.count_mode,
            cmax_grid=tuple(req.cmax_grid),
            jobs=req.jobs,
        )
    points = [
        schemas.SweepPointOut(
            params=p.params, sep_mean=p.sep_mean, coop_mean=p.coop_mean, gain_pct=p.gain_pct
        )
        for p in sweep.points
    ]
    summary = "".join(line + "\n" for line in sweep.summary_lines())
    return schemas.ReproduceResponse(
        target=req.target, csv=sweep.to_csv(), summary=summary, points=points
    )


def compare_oracle(req: schemas.OracleRequest) -> schemas.OracleResponse:
    rng = SplitMix64(req.seed)
    results: list[schemas.OracleTrial] = []
    lines: list[str] = []
    violations = 0
    optimal = 0
    ratios: list[float] = []
    for trial in range(req.trials):
        requests, pool = random_instance(
            rng,
            catalog_size=req.catalog_size,
            request_count=req.requests,
            count_max=req.count_max,
            size_max=req.size_max,
            capacity_vms=req.capacity_vms,
            reuse_capacity=req.reuse_capacity,
            initial_services=req.initial_services,
        )
        exact = oracle_optimal_reuse(requests, pool, max_nodes=req.max_nodes)
        replay_pool = PoolState(req.capacity_vms, req.reuse_capacity)
        for off in pool.offered:
            replay_pool.add_offered(off.spec)
        plans, _ = place_sequence(requests, replay_pool, COOPERATION)
        heuristic = sum(plan.total_reused for plan in plans)
        if heuristic > exact.best_total_reuse:
            violations += 1
        if heuristic == exact.best_total_reuse:
            optimal += 1
        ratio = 1.0 if exact.best_total_reuse == 0 else heuristic / exact.best_total_reuse
        ratios.append(ratio)
        results.append(
            schemas.OracleTrial(
                trial=trial,
                heuristic=heuristic,
                oracle=exact.best_total_reuse,
                ratio=ratio,
                nodes=exact.nodes_explored,
            )
        )
        lines.append(
            "trial=%d heuristic=%d oracle=%d ratio=%.3f nodes=%d"
            % (trial, heuristic, exact.best_total_reuse, ratio, exact.nodes_explored)
        )
    min_ratio = min(ratios)
    mean_ratio = sum(ratios) / len(ratios)
    lines.append(
        "trials=%d violations=%d optimal=%d/%d min_ratio=%.3f mean_ratio=%.3f"
        % (req.trials, violations, optimal, req.trials, min_ratio, mean_ratio)
    )
    return schemas.OracleResponse(
        report="".join(line + "\n" for line in lines),
        trials=req.trials,
        violations=violations,
        optimal_count=optimal,
        min_ratio=min_ratio,
        mean_ratio=mean_ratio,
        results=results,
    )


def record_out(record: MESRecord) -> schemas.RecordOut:
    plan = record.placement
    return schemas.RecordOut(
        mes_id=record.mes_id,
        name=record.mesd.name,
        vim=record.vim,
        state=record.state,
        mea_state=record.mea_state,
        ns_state=record.ns_state,
        mea_instances=record.mea_instances,
        plan=schemas.PlanOut(
            request_id=plan.request_id,
            reuse_source=plan.reuse_source,
            reused=dict(plan.reused),
            deployed_new=dict(plan.deployed_new),
            new_vms=plan.new_vms,
        ),
    )


def submit_service(orch: Orchestrator, req: schemas.SubmitRequest) -> schemas.SubmitResponse:
    mesd = parse_mesd(req.document)
    mes_id = orch.submit(mesd, vim=req.vim)
    return schemas.SubmitResponse(mes_id=mes_id, record=record_out(orch.records[mes_id]))


def apply_event(orch: Orchestrator, mes_id: int, req: schemas.EventRequest) -> schemas.RecordOut:
    event = MockBackendEvent(
        target=req.target,
        mes_id=mes_id,
        outcome=req.outcome,
        metric_name=req.metric_name,
        metric_value=req.metric_value,
    )
    return record_out(orch.on_event(event))


def list_services(orch: Orchestrator) -> schemas.ListResponse:
    return schemas.ListResponse(
        records=[record_out(r) for _, r in sorted(orch.records.items())],
        pools=[
            schemas.PoolOut(
                vim=name,
                capacity_vms=pool.capacity_vms,
                used_vms=pool.used_vms,
                reuse_capacity=pool.reuse_capacity,
                offered=len(pool.offered),
            )
            for name, pool in sorted(orch.pools.items())
        ],
    )


def run_demo(req: schemas.DemoRequest) -> schemas.DemoResponse:
    """One-shot orchestration: isolated orchestrator, scripted backend events."""
    mesd = parse_mesd(req.document)
    orch = Orchestrator(capacity_vms=req.capacity_vms, reuse_capacity=req.reuse_capacity)
    mes_id = orch.submit(mesd)
    for event in parse_event_script(req.script, mes_id):
        orch.on_event(event)
    state = orch.records[mes_id].state
    from ..orchestrator import ACTIVE, TERMINATED

    return schemas.DemoResponse(
        log=orch.render_log(), final_state=state, ok=state in (ACTIVE, TERMINATED)
    )
