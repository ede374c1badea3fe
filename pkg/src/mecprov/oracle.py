"""Exact reference search for the best total reuse a request sequence admits.

Deliberately independent of the placement engine: state here is plain dicts
and the per-type grant test is re-derived from scratch, so a bug on either
side shows up as disagreement instead of being shared. Enumeration is
depth-first over each request's choices in arrival order: reject it, deploy
it fresh, or reuse from any offered service (including ones created by
earlier choices). Instances must stay small; exceeding the node budget is an
error, never a truncated answer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import NSSpec
from .placement import PoolState
from .rng import SplitMix64


class OracleBudgetExceededError(RuntimeError):
    """Search outgrew max_nodes; the instance is too large for exact search."""

    def __init__(self, max_nodes: int) -> None:
        super().__init__("exact search exceeded the %d-node budget" % max_nodes)
        self.max_nodes = max_nodes


@dataclass
class OracleResult:
    """Optimum total reuse with one witness assignment.

    best_assignment maps request index -> offered id (None means deployed
    fresh); requests absent from the map were rejected in the witness.
    """

    best_total_reuse: int
    best_assignment: dict[int, int | None]
    nodes_explored: int


def oracle_optimal_reuse(
    requests: list[NSSpec], initial_pool: PoolState, *, max_nodes: int = 200_000
) -> OracleResult:
    capacity = initial_pool.capacity_vms
    cmax = initial_pool.reuse_capacity
    offered0: dict[int, tuple[dict[int, int], dict[int, int]]] = {
        off.id: (dict(off.spec.members), dict(off.reuse_count)) for off in initial_pool.offered
    }
    next_id0 = max(offered0, default=0) + 1
    request_counts = [dict(spec.members) for spec in requests]

    best_reuse = -1
    best_assignment: dict[int, int | None] = {}
    nodes = 0

    def grants_from(req: dict[int, int], spec: dict[int, int], share: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for type_id, wanted in req.items():
            held = spec.get(type_id)
            if held is None or held < wanted:
                continue
            holders = share.get(type_id)
            if holders is None or holders >= cmax:
                continue
            out[type_id] = wanted
        return out

    def dfs(
        k: int,
        offered: dict[int, tuple[dict[int, int], dict[int, int]]],
        used: int,
        next_id: int,
        reuse_sum: int,
        assignment: dict[int, int | None],
    ) -> None:
        nonlocal best_reuse, best_assignment, nodes
        nodes += 1
        if nodes > max_nodes:
            raise OracleBudgetExceededError(max_nodes)
        if k == len(request_counts):
            if reuse_sum > best_reuse:
                best_reuse = reuse_sum
                best_assignment = dict(assignment)
            return
        req = request_counts[k]
        fresh_cost = sum(req.values())

        # deploy fresh (first, so equal-reuse witnesses prefer placing)
        if used + fresh_cost <= capacity:
            grown = dict(offered)
            grown[next_id] = (dict(req), {i: 1 for i in req})
            dfs(k + 1, grown, used + fresh_cost, next_id + 1, reuse_sum, {**assignment, k: None})

        # reuse from every offered service that grants something
        for source_id, (spec, share) in offered.items():
            granted = grants_from(req, spec, share)
            if not granted:
                continue
            residual = {i: c for i, c in req.items() if i not in granted}
            new_vms = sum(residual.values())
            if used + new_vms > capacity:
                continue
            grown = dict(offered)
            bumped = dict(share)
            for type_id in granted:
                bumped[type_id] += 1
            grown[source_id] = (spec, bumped)
            nid = next_id
            if residual:
                grown[nid] = (residual, {i: 1 for i in residual})
                nid += 1
            dfs(
                k + 1,
                grown,
                used + new_vms,
                nid,
                reuse_sum + sum(granted.values()),
                {**assignment, k: source_id},
            )

        # reject: the request is never deployed
        dfs(k + 1, offered, used, next_id, reuse_sum, assignment)

    dfs(0, offered0, initial_pool.used_vms, next_id0, 0, {})
    return OracleResult(best_reuse, best_assignment, nodes)


def random_instance(
    rng: SplitMix64,
    *,
    catalog_size: int,
    request_count: int,
    count_max: int,
    size_max: int,
    capacity_vms: int,
    reuse_capacity: int,
    initial_services: int = 0,
) -> tuple[list[NSSpec], PoolState]:
    """Small random instance for heuristic-versus-exact comparisons.

    Initial services that would not fit the budget are skipped rather than
    retried, keeping the draw count deterministic.
    """

    def draw_spec() -> NSSpec:
        size = rng.randint(1, min(size_max, catalog_size))
        types = rng.sample(catalog_size, size)
        return NSSpec({t: rng.randint(1, count_max) for t in types})

    pool = PoolState(capacity_vms, reuse_capacity)
    for _ in range(initial_services):
        spec = draw_spec()
        if footprint_of(spec) <= pool.remaining_vms():
            pool.add_offered(spec)
    requests = [draw_spec() for _ in range(request_count)]
    return requests, pool


def footprint_of(spec: NSSpec) -> int:
    # tiny local alias so instance generation does not import the engine's
    # arithmetic; the sum is restated on purpose
    return sum(spec.members.values())
