"""Lifecycle state machine, pool accounting under events, event logs."""

import pytest

from mecprov.descriptor import parse_mesd
from mecprov.orchestrator import (
    ACTIVE,
    DEGRADED,
    DEPLOYING,
    FAILED,
    HEALING,
    SCALING,
    TERMINATED,
    EventAfterTerminalError,
    EventScriptError,
    InsufficientCapacityError,
    MockBackendEvent,
    Orchestrator,
    UnknownMesError,
    parse_event_script,
)

PLAIN = """\
mesd_version: apmec-sim/1
name: pair
mead: {name: app, vcpus: 1, memory_mb: 256}
nsd:
  vnfs:
  - {type: firewall, instances: 1}
  - {type: dpi, instances: 1}
"""

SCALING_ALARM = PLAIN.replace(
    "mead: {name: app, vcpus: 1, memory_mb: 256}",
    "mead: {name: app, vcpus: 1, memory_mb: 256, alarm: {metric: cpu, threshold: 0.9, action: scale_out}}",
).replace("name: pair", "name: scaler")

HEALING_ALARM = PLAIN.replace(
    "mead: {name: app, vcpus: 1, memory_mb: 256}",
    "mead: {name: app, vcpus: 1, memory_mb: 256, alarm: {metric: ping, threshold: 1, action: heal}}",
).replace("name: pair", "name: healer")


def mea(mes_id, outcome="deployed"):
    return MockBackendEvent("MEA", mes_id, outcome)


def ns(mes_id, outcome="deployed"):
    return MockBackendEvent("NS", mes_id, outcome)


def metric(mes_id, name, value):
    return MockBackendEvent("MEA", mes_id, "metric", name, value)


def activate(orch, mes_id):
    orch.on_event(mea(mes_id))
    orch.on_event(ns(mes_id))


class TestSubmit:
    def test_happy_path_starts_deploying(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        record = orch.records[mes_id]
        assert (record.state, record.mea_state, record.ns_state) == (DEPLOYING, DEPLOYING, DEPLOYING)
        deploys = [line for line in orch.lines if " DEPLOY " in line]
        assert len(deploys) == 2
        assert orch.pool().used_vms == 2

    def test_no_budget_no_record(self):
        orch = Orchestrator(capacity_vms=1)
        with pytest.raises(InsufficientCapacityError) as err:
            orch.submit(parse_mesd(PLAIN))
        assert err.value.shortfall == 1
        assert orch.records == {}
        assert orch.pool().used_vms == 0

    def test_full_reuse_activates_ns_immediately(self):
        orch = Orchestrator(reuse_capacity=3)
        first = orch.submit(parse_mesd(PLAIN))
        activate(orch, first)
        second = orch.submit(parse_mesd(PLAIN))
        record = orch.records[second]
        assert record.placement.new_vms == 0
        assert record.ns_state == ACTIVE
        assert record.state == DEPLOYING  # MEA still coming up
        assert "DEPLOY target=NS new_vms=0 ns=ACTIVE" in orch.lines[-1]
        orch.on_event(mea(second))
        assert record.state == ACTIVE
        assert orch.pool().used_vms == 2


class TestEvents:
    def test_both_confirmations_reach_active(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        orch.on_event(mea(mes_id))
        assert orch.records[mes_id].state == DEPLOYING
        orch.on_event(ns(mes_id))
        record = orch.records[mes_id]
        assert (record.state, record.mea_state, record.ns_state) == (ACTIVE, ACTIVE, ACTIVE)

    def test_deploy_failure_rolls_back_pool(self):
        orch = Orchestrator()
        before = orch.pool().used_vms
        mes_id = orch.submit(parse_mesd(PLAIN))
        assert orch.pool().used_vms == before + 2
        orch.on_event(ns(mes_id, "failed"))
        record = orch.records[mes_id]
        assert record.state == FAILED
        assert orch.pool().used_vms == before
        assert orch.pool().offered == []

    def test_rollback_preserves_shared_instances(self):
        orch = Orchestrator(reuse_capacity=3)
        first = orch.submit(parse_mesd(PLAIN))
        activate(orch, first)
        second = orch.submit(parse_mesd(PLAIN))  # full reuse of first
        orch.on_event(mea(second, "failed"))
        assert orch.records[second].state == FAILED
        assert orch.pool().used_vms == 2  # first still holds its NS
        source = orch.pool().offered[0]
        assert all(count == 1 for count in source.reuse_count.values())

    def test_failed_record_absorbs_later_events(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        orch.on_event(ns(mes_id, "failed"))
        orch.on_event(mea(mes_id))  # late confirmation: logged, ignored
        record = orch.records[mes_id]
        assert record.state == FAILED
        assert any("STALE" in line for line in orch.lines)

    def test_unknown_mes_id(self):
        orch = Orchestrator()
        with pytest.raises(UnknownMesError):
            orch.on_event(mea(99))

    def test_event_after_terminated(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        activate(orch, mes_id)
        orch.terminate(mes_id)
        with pytest.raises(EventAfterTerminalError):
            orch.on_event(mea(mes_id))

    def test_metric_below_threshold_changes_nothing(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(SCALING_ALARM))
        activate(orch, mes_id)
        orch.on_event(metric(mes_id, "cpu", 0.5))
        assert orch.records[mes_id].state == ACTIVE

    def test_metric_crossing_scales_out(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(SCALING_ALARM))
        activate(orch, mes_id)
        orch.on_event(metric(mes_id, "cpu", 0.95))
        record = orch.records[mes_id]
        assert record.state == SCALING
        orch.on_event(mea(mes_id))
        assert record.state == ACTIVE
        assert record.mea_instances == 2

    def test_unmatched_metric_name_ignored(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(SCALING_ALARM))
        activate(orch, mes_id)
        orch.on_event(metric(mes_id, "memory", 99.0))
        assert orch.records[mes_id].state == ACTIVE


class TestHeal:
    def test_mea_failure_with_heal_alarm_relaunches(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(HEALING_ALARM))
        activate(orch, mes_id)
        orch.on_event(mea(mes_id, "failed"))
        record = orch.records[mes_id]
        assert record.state == HEALING
        orch.on_event(mea(mes_id))
        assert record.state == ACTIVE
        assert record.mea_instances == 1

    def test_mea_failure_without_alarm_degrades(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        activate(orch, mes_id)
        orch.on_event(mea(mes_id, "failed"))
        assert orch.records[mes_id].state == DEGRADED

    def test_explicit_heal_recovers_degraded_record(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        activate(orch, mes_id)
        orch.on_event(mea(mes_id, "failed"))
        orch.heal(mes_id)
        assert orch.records[mes_id].state == HEALING
        orch.on_event(mea(mes_id))
        assert orch.records[mes_id].state == ACTIVE

    def test_heal_on_terminated_is_terminal_error(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        activate(orch, mes_id)
        orch.terminate(mes_id)
        with pytest.raises(EventAfterTerminalError):
            orch.heal(mes_id)

    def test_two_failures_two_heal_cycles_logged(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(HEALING_ALARM))
        activate(orch, mes_id)
        for _ in range(2):
            orch.on_event(mea(mes_id, "failed"))
            orch.on_event(mea(mes_id))
        heal_lines = [body for _, body in orch.records[mes_id].event_log if body.startswith("HEAL")]
        assert len(heal_lines) == 2
        assert orch.records[mes_id].state == ACTIVE


class TestTerminate:
    def test_sole_owner_frees_footprint(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        activate(orch, mes_id)
        record = orch.terminate(mes_id)
        assert record.state == TERMINATED
        assert orch.pool().used_vms == 0
        assert "released_vms=2" in orch.lines[-1]

    def test_reuser_termination_releases_nothing(self):
        orch = Orchestrator(reuse_capacity=3)
        first = orch.submit(parse_mesd(PLAIN))
        activate(orch, first)
        second = orch.submit(parse_mesd(PLAIN))
        orch.on_event(mea(second))
        orch.terminate(second)
        assert orch.pool().used_vms == 2
        source = orch.pool().offered[0]
        assert all(count == 1 for count in source.reuse_count.values())

    def test_owner_first_instances_survive_until_last_sharer(self):
        orch = Orchestrator(reuse_capacity=3)
        first = orch.submit(parse_mesd(PLAIN))
        activate(orch, first)
        second = orch.submit(parse_mesd(PLAIN))
        orch.on_event(mea(second))
        orch.terminate(first)
        assert orch.pool().used_vms == 2  # reuser still holds the instances
        orch.terminate(second)
        assert orch.pool().used_vms == 0
        assert orch.pool().offered == []

    def test_terminate_failed_record_does_not_double_release(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        orch.on_event(ns(mes_id, "failed"))  # rolled back already
        orch.terminate(mes_id)
        assert orch.pool().used_vms == 0

    def test_terminated_is_absorbing(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        activate(orch, mes_id)
        orch.terminate(mes_id)
        with pytest.raises(EventAfterTerminalError):
            orch.terminate(mes_id)


class TestInvariantsAndLog:
    def test_active_iff_both_substates_active(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(SCALING_ALARM))
        record = orch.records[mes_id]
        script = [
            mea(mes_id), ns(mes_id), metric(mes_id, "cpu", 0.99), mea(mes_id),
            mea(mes_id, "failed"),
        ]
        for event in script:
            orch.on_event(event)
            active_halves = record.mea_state == ACTIVE and record.ns_state == ACTIVE
            assert (record.state == ACTIVE) == active_halves

    def test_event_log_timestamps_strictly_increase(self):
        orch = Orchestrator()
        a = orch.submit(parse_mesd(PLAIN))
        b = orch.submit(parse_mesd(PLAIN))
        activate(orch, a)
        activate(orch, b)
        orch.terminate(a)
        for record in orch.records.values():
            stamps = [t for t, _ in record.event_log]
            assert stamps == sorted(stamps)
            assert len(set(stamps)) == len(stamps)

    def test_coordinate_update_forwards_and_logs(self):
        orch = Orchestrator()
        mes_id = orch.submit(parse_mesd(PLAIN))
        activate(orch, mes_id)
        orch.coordinate_update(mes_id, "allow-port-8080")
        assert orch.mano_updates == [(mes_id, "allow-port-8080")]
        assert any("COORD" in line for line in orch.lines)


class TestMultiVim:
    def test_submit_targets_named_pool_only(self):
        orch = Orchestrator(capacity_vms=10)
        orch.add_vim("edge-2", capacity_vms=5, reuse_capacity=2)
        mes_id = orch.submit(parse_mesd(PLAIN), vim="edge-2")
        assert orch.pools["edge-2"].used_vms == 2
        assert orch.pools["default"].used_vms == 0
        assert orch.records[mes_id].vim == "edge-2"

    def test_unknown_vim_rejected(self):
        orch = Orchestrator()
        with pytest.raises(ValueError):
            orch.submit(parse_mesd(PLAIN), vim="nowhere")

    def test_duplicate_vim_name_rejected(self):
        orch = Orchestrator()
        with pytest.raises(ValueError):
            orch.add_vim("default", 10, 1)


class TestEventScript:
    def test_accepted_lines(self):
        text = "# warmup\nMEA deployed\n\nNS deployed\nMEA failed\nNS failed\nMETRIC cpu 0.95\n"
        events = parse_event_script(text, 7)
        assert [e.outcome for e in events] == ["deployed", "deployed", "failed", "failed", "metric"]
        assert events[-1].metric_name == "cpu"
        assert events[-1].metric_value == 0.95
        assert all(e.mes_id == 7 for e in events)

    def test_bad_line_reports_line_number(self):
        with pytest.raises(EventScriptError) as err:
            parse_event_script("MEA deployed\nVNF exploded\n", 1)
        assert err.value.line == 2

    def test_bad_metric_value(self):
        with pytest.raises(EventScriptError):
            parse_event_script("METRIC cpu high\n", 1)
