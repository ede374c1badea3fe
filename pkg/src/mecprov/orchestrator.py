"""Lifecycle orchestration of MEC services over mock infrastructure backends.

Submission lowers the descriptor, places the NS half on the named VIM pool
(cooperative reuse), then the record advances purely on injected backend
events: deploy confirmations, failures, and metric samples. Time is a
logical counter, so every run replays identically and the event log can be
golden-file tested.

State rules worth knowing before editing:
  - the record is ACTIVE exactly when both halves are ACTIVE; SCALING and
    HEALING park the application half in DEPLOYING until its confirmation;
  - a deploy failure rolls the placement back and FAILED absorbs any later
    events (logged as STALE, no state change); TERMINATED rejects them;
  - instance holdings are reference counted, so an owner terminating first
    leaves shared VMs alive until the last reuser lets go.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .descriptor import MESD, to_request
from .model import NFCatalog
from .placement import (
    COOPERATION,
    PlacementPlan,
    PoolState,
    Rejected,
    place,
    release_placement,
)

# record states
PENDING = "PENDING"
DEPLOYING = "DEPLOYING"
ACTIVE = "ACTIVE"
DEGRADED = "DEGRADED"
SCALING = "SCALING"
HEALING = "HEALING"
TERMINATING = "TERMINATING"
TERMINATED = "TERMINATED"
FAILED = "FAILED"

MES_STATES = (
    PENDING, DEPLOYING, ACTIVE, DEGRADED, SCALING, HEALING,
    TERMINATING, TERMINATED, FAILED,
)
SUB_STATES = (PENDING, DEPLOYING, ACTIVE, FAILED)

TARGET_MEA = "MEA"
TARGET_NS = "NS"

OUTCOME_DEPLOYED = "deployed"
OUTCOME_FAILED = "failed"
OUTCOME_METRIC = "metric"


class UnknownMesError(KeyError):
    def __init__(self, mes_id: int) -> None:
        super().__init__(mes_id)
        self.mes_id = mes_id

    def __str__(self) -> str:
        return "unknown MES id %d" % self.mes_id


class EventAfterTerminalError(RuntimeError):
    def __init__(self, mes_id: int) -> None:
        super().__init__("MES %d is terminated and accepts no further events" % mes_id)
        self.mes_id = mes_id


class InsufficientCapacityError(RuntimeError):
    def __init__(self, shortfall: int) -> None:
        super().__init__("insufficient capacity: %d more VM(s) needed" % shortfall)
        self.shortfall = shortfall


class EventScriptError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__("line %d: %s" % (line, message))
        self.line = line


@dataclass
class MockBackendEvent:
    """Stand-in for a VIM/MANO callback aimed at one record."""

    target: str
    mes_id: int
    outcome: str
    metric_name: str | None = None
    metric_value: float | None = None


@dataclass
class MESRecord:
    mes_id: int
    mesd: MESD
    vim: str
    state: str
    mea_state: str
    ns_state: str
    mea_instances: int
    placement: PlacementPlan
    event_log: list[tuple[int, str]] = field(default_factory=list)
    placement_released: bool = False


class Orchestrator:
    """Single logical event loop over named VIM pools and MES records."""

    def __init__(self, *, capacity_vms: int = 100, reuse_capacity: int = 3,
                 catalog: NFCatalog | None = None) -> None:
        self.catalog = catalog if catalog is not None else NFCatalog()
        self.pools: dict[str, PoolState] = {
            "default": PoolState(capacity_vms, reuse_capacity)
        }
        self.records: dict[int, MESRecord] = {}
        self.lines: list[str] = []
        self.mano_updates: list[tuple[int, object]] = []
        self._clock = 0
        self._next_mes = 1

    # -- plumbing ----------------------------------------------------------

    def add_vim(self, name: str, capacity_vms: int, reuse_capacity: int) -> PoolState:
        if name in self.pools:
            raise ValueError("VIM %r already registered" % name)
        pool = PoolState(capacity_vms, reuse_capacity)
        self.pools[name] = pool
        return pool

    def pool(self, vim: str = "default") -> PoolState:
        try:
            return self.pools[vim]
        except KeyError:
            raise ValueError("unknown VIM %r" % vim) from None

    def _get(self, mes_id: int) -> MESRecord:
        record = self.records.get(mes_id)
        if record is None:
            raise UnknownMesError(mes_id)
        return record

    def _log(self, mes_id: int, event: str, **details: object) -> None:
        self._clock += 1
        body = event
        if details:
            body += " " + " ".join("%s=%s" % (k, v) for k, v in details.items())
        self.lines.append("t=%d mes=%d %s" % (self._clock, mes_id, body))
        record = self.records.get(mes_id)
        if record is not None:
            record.event_log.append((self._clock, body))

    def render_log(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    # -- operations --------------------------------------------------------

    def submit(self, mesd: MESD, vim: str = "default") -> int:
        """Split the descriptor, place the NS half, start deployment.

        Raises InsufficientCapacityError (pool untouched, no record) when the
        fresh part does not fit the VIM's remaining budget.
        """
        pool = self.pool(vim)
        request = to_request(mesd, self.catalog, request_id=self._next_mes)
        outcome = place(request, pool, COOPERATION)
        if isinstance(outcome, Rejected):
            raise InsufficientCapacityError(outcome.shortfall)
        mes_id = self._next_mes
        self._next_mes += 1
        record = MESRecord(
            mes_id, mesd, vim, DEPLOYING, DEPLOYING, DEPLOYING, 1, outcome
        )
        self.records[mes_id] = record
        self._log(mes_id, "SUBMIT", name=mesd.name, vim=vim)
        source = "-" if outcome.reuse_source is None else outcome.reuse_source
        self._log(mes_id, "PLACE", source=source, reused=outcome.total_reused,
                  new_vms=outcome.new_vms)
        self._log(mes_id, "DEPLOY", target=TARGET_MEA)
        if outcome.new_vms == 0:
            # nothing to stand up: the reused NS is already running
            record.ns_state = ACTIVE
            self._log(mes_id, "DEPLOY", target=TARGET_NS, new_vms=0, ns=ACTIVE)
        else:
            self._log(mes_id, "DEPLOY", target=TARGET_NS, new_vms=outcome.new_vms)
        return mes_id

    def on_event(self, event: MockBackendEvent) -> MESRecord:
        """Advance one record on a backend confirmation, failure or metric."""
        record = self._get(event.mes_id)
        if record.state == TERMINATED:
            raise EventAfterTerminalError(event.mes_id)
        if record.state == FAILED:
            self._log(record.mes_id, "STALE", target=event.target, outcome=event.outcome)
            return record
        if event.outcome == OUTCOME_DEPLOYED:
            self._confirm(record, event.target)
        elif event.outcome == OUTCOME_FAILED:
            self._fail(record, event.target)
        elif event.outcome == OUTCOME_METRIC:
            self._metric(record, event)
        else:
            raise ValueError("unknown event outcome %r" % event.outcome)
        return record

    def _confirm(self, record: MESRecord, target: str) -> None:
        was = record.state
        if target == TARGET_MEA:
            record.mea_state = ACTIVE
            if was == SCALING:
                record.mea_instances += 1
        elif target == TARGET_NS:
            record.ns_state = ACTIVE
        else:
            raise ValueError("unknown event target %r" % target)
        if record.mea_state == ACTIVE and record.ns_state == ACTIVE:
            record.state = ACTIVE
        self._log(record.mes_id, "CONFIRM", target=target, mea=record.mea_state,
                  ns=record.ns_state, state=record.state,
                  instances=record.mea_instances)

    def _fail(self, record: MESRecord, target: str) -> None:
        if record.state == DEPLOYING:
            if target == TARGET_MEA:
                record.mea_state = FAILED
            else:
                record.ns_state = FAILED
            record.state = FAILED
            freed = 0
            if not record.placement_released:
                freed = release_placement(self.pools[record.vim], record.placement)
                record.placement_released = True
            self._log(record.mes_id, "FAIL", target=target, state=FAILED, rollback=freed)
            return
        if target == TARGET_MEA:
            record.mea_state = FAILED
            alarm = record.mesd.alarm
            if alarm is not None and alarm.action == "heal":
                record.state = HEALING
                self._log(record.mes_id, "FAIL", target=target, state=HEALING)
                self._issue_heal(record)
            else:
                record.state = DEGRADED
                self._log(record.mes_id, "FAIL", target=target, state=DEGRADED)
        else:
            record.ns_state = FAILED
            record.state = DEGRADED
            self._log(record.mes_id, "FAIL", target=target, state=DEGRADED)

    def _metric(self, record: MESRecord, event: MockBackendEvent) -> None:
        self._log(record.mes_id, "METRIC", name=event.metric_name,
                  value=event.metric_value)
        alarm = record.mesd.alarm
        if alarm is None or event.metric_name != alarm.metric:
            return
        if event.metric_value is None or event.metric_value < alarm.threshold:
            return
        if alarm.action == "scale_out":
            record.state = SCALING
            record.mea_state = DEPLOYING
            self._log(record.mes_id, "ALARM", action=alarm.action, state=SCALING)
            self._log(record.mes_id, "DEPLOY", target=TARGET_MEA)
        else:
            record.state = HEALING
            self._log(record.mes_id, "ALARM", action=alarm.action, state=HEALING)
            self._issue_heal(record)

    def _issue_heal(self, record: MESRecord) -> None:
        record.mea_state = DEPLOYING
        self._log(record.mes_id, "HEAL", deploy=TARGET_MEA, state=HEALING)

    def heal(self, mes_id: int) -> MESRecord:
        """Relaunch the application half from the stored descriptor."""
        record = self._get(mes_id)
        if record.state == TERMINATED:
            raise EventAfterTerminalError(mes_id)
        record.state = HEALING
        self._issue_heal(record)
        return record

    def terminate(self, mes_id: int) -> MESRecord:
        """Release this MES's holdings (reference counted) and finish it."""
        record = self._get(mes_id)
        if record.state == TERMINATED:
            raise EventAfterTerminalError(mes_id)
        freed = 0
        if not record.placement_released:
            freed = release_placement(self.pools[record.vim], record.placement)
            record.placement_released = True
        record.state = TERMINATED
        self._log(mes_id, "TERMINATE", released_vms=freed, state=TERMINATED)
        return record

    def coordinate_update(self, mes_id: int, payload: object) -> MESRecord:
        """Pass-through coordination hook: log and forward to the mock MANO."""
        record = self._get(mes_id)
        if record.state == TERMINATED:
            raise EventAfterTerminalError(mes_id)
        self.mano_updates.append((mes_id, payload))
        self._log(mes_id, "COORD", payload=payload)
        return record


def parse_event_script(text: str, mes_id: int) -> list[MockBackendEvent]:
    """Parse the demo event script: one event per line.

    Accepted lines: ``MEA deployed``, ``NS deployed``, ``MEA failed``,
    ``NS failed``, ``METRIC <name> <value>``. Blank lines and ``#`` comments
    are skipped.
    """
    events: list[MockBackendEvent] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "METRIC":
            if len(parts) != 3:
                raise EventScriptError(lineno, "expected METRIC <name> <value>")
            try:
                value = float(parts[2])
            except ValueError:
                raise EventScriptError(lineno, "metric value %r is not a number" % parts[2]) from None
            events.append(MockBackendEvent(TARGET_MEA, mes_id, OUTCOME_METRIC, parts[1], value))
            continue
        if len(parts) == 2 and parts[0] in (TARGET_MEA, TARGET_NS) and parts[1] in (
            OUTCOME_DEPLOYED,
            OUTCOME_FAILED,
        ):
            events.append(MockBackendEvent(parts[0], mes_id, parts[1]))
            continue
        raise EventScriptError(lineno, "unrecognized event %r" % line)
    return events
