"""Reuse-aware placement of requested network services on a shared VM pool.

Selection runs in two phases: phase 1 keeps the offered services that can
grant the most of the request's NF types, phase 2 picks the tightest
footprint among them (classic best fit). A grant is all-or-nothing per type:
the source must hold at least the requested instance count of that type and
have a free share slot. Types the winner cannot cover are deployed fresh,
and the residual joins the pool as a new offered service, so the pool can
grow from empty.

Under the ``separation`` policy nothing is ever reused; every request is
deployed fresh. With a reuse capacity of 1 the two policies are equivalent
by construction (the owner occupies the only share slot).
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import MESRequest, NOMINAL_MEA, NSSpec, OfferedNS, footprint

SEPARATION = "separation"
COOPERATION = "cooperation"
POLICIES = (SEPARATION, COOPERATION)


@dataclass
class PlacementPlan:
    """Accepted decision for one request.

    Per request type, ``reused`` and ``deployed_new`` partition the requested
    instance count; ``deployed_ns_id`` is the offered NS created for the
    fresh part (None when everything was reused).
    """

    request_id: int
    reuse_source: int | None
    reused: dict[int, int]
    deployed_new: dict[int, int]
    new_vms: int
    deployed_ns_id: int | None = None

    @property
    def total_reused(self) -> int:
        return sum(self.reused.values())


@dataclass
class Rejected:
    """Placement refusal: the fresh part does not fit the remaining budget."""

    request_id: int
    shortfall: int


class PoolState:
    """Offered services plus the VM budget; single-owner mutable state.

    used_vms always equals the live footprint of the offered set. The holder
    index (type id -> offered services with that type live) only tracks
    liveness; share-slot saturation is checked at grant time because
    terminations can reopen slots.
    """

    def __init__(self, capacity_vms: int, reuse_capacity: int) -> None:
        if capacity_vms < 1:
            raise ValueError("capacity_vms must be >= 1")
        if reuse_capacity < 1:
            raise ValueError("reuse_capacity must be >= 1")
        self.capacity_vms = capacity_vms
        self.reuse_capacity = reuse_capacity
        self.offered: list[OfferedNS] = []
        self.used_vms = 0
        self._next_id = 1
        self._by_id: dict[int, OfferedNS] = {}
        self._holders: dict[int, dict[int, OfferedNS]] = {}

    def remaining_vms(self) -> int:
        return self.capacity_vms - self.used_vms

    def get(self, offered_id: int) -> OfferedNS:
        return self._by_id[offered_id]

    def holders_of(self, type_id: int) -> list[OfferedNS]:
        bucket = self._holders.get(type_id)
        return list(bucket.values()) if bucket else []

    def add_offered(self, spec: NSSpec) -> OfferedNS:
        """Deploy a service's instances: consumes VMs, becomes shareable."""
        cost = footprint(spec)
        if cost > self.remaining_vms():
            raise ValueError("offered NS footprint %d exceeds remaining budget %d" % (cost, self.remaining_vms()))
        off = OfferedNS.fresh(self._next_id, spec)
        self._next_id += 1
        self.offered.append(off)
        self._by_id[off.id] = off
        for type_id in spec.members:
            self._holders.setdefault(type_id, {})[off.id] = off
        self.used_vms += cost
        return off

    def increment_share(self, offered_id: int, type_id: int) -> None:
        off = self._by_id[offered_id]
        if off.reuse_count[type_id] >= self.reuse_capacity:
            raise ValueError("share slots exhausted for offered %d type %d" % (offered_id, type_id))
        off.reuse_count[type_id] += 1

    def decrement_share(self, offered_id: int, type_id: int) -> int:
        """Drop one holder of a type; returns the VMs freed (0 unless last)."""
        off = self._by_id[offered_id]
        off.reuse_count[type_id] -= 1
        if off.reuse_count[type_id] > 0:
            return 0
        del off.reuse_count[type_id]
        bucket = self._holders[type_id]
        del bucket[off.id]
        if not bucket:
            del self._holders[type_id]
        freed = off.spec.members[type_id]
        self.used_vms -= freed
        if not off.reuse_count:
            del self._by_id[off.id]
            self.offered.remove(off)
        return freed

    def live_footprint(self) -> int:
        """Recomputed from scratch; must equal used_vms (audit helper)."""
        return sum(off.live_footprint() for off in self.offered)


def reusable_vector(request: NSSpec, source: OfferedNS, cmax: int) -> dict[int, int]:
    """Instance counts the source can grant the request, per NF type.

    A type is granted in full (the requested count) when the source holds at
    least that many live instances of it and fewer than cmax services share
    them; otherwise it is not granted at all.
    """
    grants: dict[int, int] = {}
    for type_id, wanted in request.members.items():
        share = source.reuse_count.get(type_id)
        if share is None or share >= cmax:
            continue
        if source.spec.members[type_id] >= wanted:
            grants[type_id] = wanted
    return grants


def phase1_candidates(request: NSSpec, pool: PoolState) -> list[int]:
    """Offered NS ids granting the most of the request's types (ascending).

    Services granting nothing never qualify, so an empty pool or a fully
    saturated one yields an empty list.
    """
    cmax = pool.reuse_capacity
    scores: dict[int, int] = {}
    for type_id, wanted in request.members.items():
        for off in pool.holders_of(type_id):
            if off.reuse_count[type_id] < cmax and off.spec.members[type_id] >= wanted:
                scores[off.id] = scores.get(off.id, 0) + 1
    if not scores:
        return []
    best = max(scores.values())
    return sorted(m for m, s in scores.items() if s == best)


def phase2_select(request: NSSpec, candidates: list[OfferedNS], cmax: int) -> int | None:
    """Best fit among phase-1 winners: smallest live footprint.

    Ties prefer the larger total grant, then the lowest offered id, keeping
    runs deterministic.
    """
    best_id: int | None = None
    best_key: tuple[int, int, int] | None = None
    for off in candidates:
        granted = sum(reusable_vector(request, off, cmax).values())
        key = (off.live_footprint(), -granted, off.id)
        if best_key is None or key < best_key:
            best_key = key
            best_id = off.id
    return best_id


def place(request: MESRequest, pool: PoolState, policy: str) -> PlacementPlan | Rejected:
    """Place one request, mutating the pool on acceptance only."""
    if policy not in POLICIES:
        raise ValueError("unknown policy %r" % policy)
    reused: dict[int, int] = {}
    source_id: int | None = None
    if policy == COOPERATION:
        candidate_ids = phase1_candidates(request.ns, pool)
        source_id = phase2_select(
            request.ns, [pool.get(m) for m in candidate_ids], pool.reuse_capacity
        )
        if source_id is not None:
            reused = reusable_vector(request.ns, pool.get(source_id), pool.reuse_capacity)
            assert reused, "phase 1 only keeps sources granting at least one type"
    deployed_new = {i: c for i, c in request.ns.members.items() if i not in reused}
    new_vms = sum(deployed_new.values())
    if new_vms > pool.remaining_vms():
        return Rejected(request.id, new_vms - pool.remaining_vms())
    for type_id in reused:
        pool.increment_share(source_id, type_id)
    deployed_ns_id = None
    if deployed_new:
        deployed_ns_id = pool.add_offered(NSSpec(deployed_new)).id
    return PlacementPlan(request.id, source_id, reused, deployed_new, new_vms, deployed_ns_id)


def total_instances(pool: PoolState) -> int:
    """NF instances currently deployed in the pool."""
    return pool.used_vms


def place_sequence(
    specs: list[NSSpec], pool: PoolState, policy: str
) -> tuple[list[PlacementPlan], Rejected | None]:
    """Place requests in arrival order, stopping at the first rejection."""
    plans: list[PlacementPlan] = []
    for idx, spec in enumerate(specs):
        outcome = place(MESRequest(idx, NOMINAL_MEA, spec), pool, policy)
        if isinstance(outcome, Rejected):
            return plans, outcome
        plans.append(outcome)
    return plans, None


def release_placement(pool: PoolState, plan: PlacementPlan) -> int:
    """Return a plan's instance holdings to the pool; returns VMs freed.

    Reference counted: a type's VMs are only freed when its last holder
    (owner or reuser) lets go, so shared instances survive the owner.
    """
    freed = 0
    if plan.reuse_source is not None:
        for type_id in plan.reused:
            freed += pool.decrement_share(plan.reuse_source, type_id)
    if plan.deployed_ns_id is not None:
        own = pool.get(plan.deployed_ns_id)
        for type_id in list(own.reuse_count):
            freed += pool.decrement_share(plan.deployed_ns_id, type_id)
    return freed
